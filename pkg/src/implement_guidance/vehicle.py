"""Bicycle-model plant simulation and implement-point geometry.

World pose integrates the kinematic bicycle model with a fixed-step RK4
scheme; the Frenet state is recomputed by projection each step (ground truth)
rather than by integrating the curvilinear model, so the curvilinear
equations can be validated against it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

from .errors import ParameterError, SingularityError
from .paths import FrenetState, ReferencePath, wrap_angle

SINGULARITY_EPS = 1e-6


@dataclass(frozen=True)
class VehicleConfig:
    wheelbase: float = 1.2          # m
    steer_limit: float = 0.55       # rad
    steer_rate_limit: float = 0.8   # rad/s
    speed: float = 1.0              # m/s, strictly positive

    def __post_init__(self):
        if self.wheelbase <= 0:
            raise ParameterError("wheelbase must be > 0")
        if not 0 < self.steer_limit < math.pi / 2:
            raise ParameterError("steer_limit must be in (0, pi/2)")
        if self.steer_rate_limit <= 0:
            raise ParameterError("steer_rate_limit must be > 0")
        if self.speed <= 0:
            raise ParameterError("speed must be > 0")


@dataclass(frozen=True)
class ImplementConfig:
    I_s: float  # longitudinal offset from rear-axle center, m, signed
    I_y: float  # lateral offset, m, signed (positive left)


@dataclass(frozen=True)
class VehiclePose:
    x: float
    y_world: float
    heading: float  # rad, wrapped to (-pi, pi]
    steer: float    # rad


@dataclass(frozen=True)
class Measurements:
    """Controller-side measurement bundle taken at one control instant."""
    frenet: FrenetState
    omega_bar: float            # yaw rate from the measured steering angle, rad/s
    e_I: float                  # measured implement lateral error, m
    curvature_now: float        # c(s), 1/m
    curvature_at_horizon: float  # c(s + s_h), 1/m


def implement_world_position(pose: VehiclePose, imp: ImplementConfig) -> tuple[float, float]:
    """World position of the implement point: O + R(psi) (I_s, I_y)."""
    ch, sh = math.cos(pose.heading), math.sin(pose.heading)
    return (pose.x + ch * imp.I_s - sh * imp.I_y,
            pose.y_world + sh * imp.I_s + ch * imp.I_y)


def implement_error_exact(pose: VehiclePose, imp: ImplementConfig, path: ReferencePath) -> float:
    """Ground-truth implement lateral error: project the implement point onto the path."""
    return path.project(implement_world_position(pose, imp), pose.heading).frenet.y


def implement_error_measured(frenet: FrenetState, imp: ImplementConfig) -> float:
    """Controller-side estimate: lateral coordinate of the implement point
    measured along the local y-axis at the robot's abscissa."""
    return frenet.y + imp.I_s * math.sin(frenet.theta_tilde) + imp.I_y * math.cos(frenet.theta_tilde)


def yaw_rate_from_steer(steer: float, frenet: FrenetState, path: ReferencePath,
                        cfg: VehicleConfig) -> float:
    """Yaw rate implied by the measured steering angle and the curvilinear model."""
    c = path.curvature_at(frenet.s)
    denom = 1.0 - c * frenet.y
    if abs(denom) < SINGULARITY_EPS:
        raise SingularityError(f"1 - c*y = {denom} at s={frenet.s}")
    return cfg.speed * (math.tan(steer) / cfg.wheelbase
                        - c * math.cos(frenet.theta_tilde) / denom)


def measure(pose: VehiclePose, frenet: FrenetState, path: ReferencePath,
            cfg: VehicleConfig, imp: ImplementConfig, horizon: float) -> Measurements:
    """Assemble the measurement bundle the controllers consume."""
    return Measurements(
        frenet=frenet,
        omega_bar=yaw_rate_from_steer(pose.steer, frenet, path, cfg),
        e_I=implement_error_measured(frenet, imp),
        curvature_now=path.curvature_at(frenet.s),
        curvature_at_horizon=path.curvature_ahead(frenet.s, horizon),
    )


def integrate_pose(pose: VehiclePose, steer_fn: Callable[[float], float],
                   t0: float, dt: float, cfg: VehicleConfig) -> VehiclePose:
    """One RK4 step of (x, y, psi) under the bicycle model with steer = steer_fn(t)."""
    v, L = cfg.speed, cfg.wheelbase

    def deriv(t, x, y, psi):
        return (v * math.cos(psi), v * math.sin(psi), v * math.tan(steer_fn(t)) / L)

    x, y, psi = pose.x, pose.y_world, pose.heading
    k1 = deriv(t0, x, y, psi)
    k2 = deriv(t0 + dt / 2, x + dt / 2 * k1[0], y + dt / 2 * k1[1], psi + dt / 2 * k1[2])
    k3 = deriv(t0 + dt / 2, x + dt / 2 * k2[0], y + dt / 2 * k2[1], psi + dt / 2 * k2[2])
    k4 = deriv(t0 + dt, x + dt * k3[0], y + dt * k3[1], psi + dt * k3[2])
    return replace(
        pose,
        x=x + dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        y_world=y + dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        heading=wrap_angle(psi + dt / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])),
    )


def apply_steer_command(steer: float, steer_cmd: float, dt: float, cfg: VehicleConfig) -> float:
    """Clamp the command to the steer limit and slew from the current angle."""
    target = max(-cfg.steer_limit, min(cfg.steer_limit, steer_cmd))
    max_step = cfg.steer_rate_limit * dt
    return steer + max(-max_step, min(max_step, target - steer))


def step(pose: VehiclePose, frenet: FrenetState, steer_cmd: float, dt: float,
         path: ReferencePath, cfg: VehicleConfig) -> tuple[VehiclePose, FrenetState]:
    """Advance the plant by dt under a zero-order-hold steering command.

    Raises SingularityError when the osculating-circle guard |1 - c*y| trips.
    """
    if dt <= 0:
        raise ParameterError("dt must be > 0")
    c = path.curvature_at(frenet.s)
    if abs(1.0 - c * frenet.y) < SINGULARITY_EPS:
        raise SingularityError(f"1 - c*y guard tripped at s={frenet.s}")
    new_steer = apply_steer_command(pose.steer, steer_cmd, dt, cfg)
    moved = integrate_pose(replace(pose, steer=new_steer), lambda t: new_steer, 0.0, dt, cfg)
    proj = path.project((moved.x, moved.y_world), moved.heading)
    new_frenet = proj.frenet
    c_new = path.curvature_at(new_frenet.s)
    if abs(1.0 - c_new * new_frenet.y) < SINGULARITY_EPS:
        raise SingularityError(f"1 - c*y guard tripped at s={new_frenet.s}")
    return moved, new_frenet


def pose_on_path(path: ReferencePath, s: float, lateral: float = 0.0,
                 heading_offset: float = 0.0, steer: float = 0.0) -> VehiclePose:
    """Convenience: world pose of a vehicle at (s, lateral, heading offset)."""
    (px, py), th, _ = path.point_at(s)
    nx, ny = -math.sin(th), math.cos(th)
    return VehiclePose(x=px + lateral * nx, y_world=py + lateral * ny,
                       heading=wrap_angle(th + heading_offset), steer=steer)
