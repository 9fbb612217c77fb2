"""Steering controllers for the offset implement point.

All controllers share the same interface: a Measurements bundle in, a
ControlCommand out. The optimal predictive controller works in two stages:
a closed-form least-squares choice of the desired heading over a look-ahead
arc length, then a backstepping steering law that tracks that heading. The
lateral-servoing and backstepping baselines are reconstructions of earlier
non-predictive designs (their exact published forms are not available) and
are flagged as such in reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import DomainError, ParameterError, SingularityError
from .vehicle import ImplementConfig, Measurements, VehicleConfig

SINGULARITY_EPS = 1e-6


@dataclass(frozen=True)
class OptimalParams:
    lam: float        # 1/m, convergence shaping
    k_theta: float    # 1/m, heading gain
    s_h: float        # m, prediction horizon
    s_t: float        # m, sampling step

    def __post_init__(self):
        if min(self.lam, self.k_theta, self.s_h, self.s_t) <= 0:
            raise ParameterError("lam, k_theta, s_h, s_t must all be > 0")
        if self.s_t > self.s_h:
            raise ParameterError("s_t must not exceed s_h")
        if self.n_h < 1:
            raise ParameterError("horizon must contain at least one sample")

    @property
    def n_h(self) -> int:
        return round(self.s_h / self.s_t)


@dataclass(frozen=True)
class BaselineParams:
    k_y: float      # 1/m
    k_theta: float  # 1/m

    def __post_init__(self):
        if self.k_y <= 0 or self.k_theta <= 0:
            raise ParameterError("baseline gains must be > 0")


@dataclass(frozen=True)
class SigmaTerms:
    sigma1: float   # m
    sigma2: float   # m^2
    sigma3: float   # m^3
    sigma_e: float  # m


@dataclass(frozen=True)
class ControlCommand:
    delta_desired: float            # rad, clamped to the steer limit
    theta_desired: float = 0.0      # rad
    xi_desired: float = 0.0
    clamped: bool = False
    fault: bool = False
    diagnostics: dict = field(default_factory=dict)


def alpha_gamma(meas: Measurements, v: float) -> tuple[float, float]:
    """alpha = 1 - c(s) y; gamma = omega_bar / v."""
    if v <= 0:
        raise ParameterError("v must be > 0")
    alpha = 1.0 - meas.curvature_now * meas.frenet.y
    if abs(alpha) < SINGULARITY_EPS:
        raise SingularityError("robot at the center of the osculating circle")
    return alpha, meas.omega_bar / v


def e_I_prime(theta_tilde: float, alpha: float, gamma: float, imp: ImplementConfig) -> float:
    """Spatial first derivative of the implement lateral error."""
    if abs(theta_tilde) >= math.pi / 2:
        raise DomainError("|theta_tilde| must be < pi/2")
    t = math.tan(theta_tilde)
    return alpha * (t + gamma * (imp.I_s - imp.I_y * t))


def e_I_second(theta_tilde: float, alpha: float, steer: float, curvature: float,
               wheelbase: float) -> float:
    """Spatial second derivative of the implement lateral error.

    The curvature argument is the preview value at the end of the horizon,
    which is what gives the controller its anticipation.
    """
    if abs(theta_tilde) >= math.pi / 2:
        raise DomainError("|theta_tilde| must be < pi/2")
    if abs(alpha) < SINGULARITY_EPS:
        raise SingularityError("alpha ~ 0 in e_I_second")
    ct = math.cos(theta_tilde)
    return (alpha * alpha / ct) * (math.tan(steer) / wheelbase - curvature * ct / alpha)


def sigma_terms(params: OptimalParams) -> SigmaTerms:
    """Power sums over the discretized horizon (the k=0 terms are zero)."""
    s1 = s2 = s3 = se = 0.0
    for k in range(params.n_h + 1):
        u = k * params.s_t
        s1 += u
        s2 += u * u
        s3 += u ** 3
        se += u * math.exp(-params.lam * u)
    return SigmaTerms(sigma1=s1, sigma2=s2, sigma3=s3, sigma_e=se)


def predicted_cost(xi: float, e_I: float, alpha: float, gamma: float,
                   imp: ImplementConfig, e_second: float, params: OptimalParams) -> float:
    """Sum of squared gaps between the predicted error and the exponential
    reference profile over the horizon. Quadratic and convex in xi.

    The prediction is e + e'u + e''u^2 with e'' frozen at its end-of-horizon
    preview value. The u^2 coefficient is e'' itself, not the Taylor e''/2;
    the convergence shaping and gain tuning absorb the scale.
    """
    total = 0.0
    for k in range(1, params.n_h + 1):
        u = k * params.s_t
        pred = e_I + xi * u + alpha * gamma * imp.I_s * u + e_second * u * u
        total += (pred - e_I * math.exp(-params.lam * u)) ** 2
    return total


def xi_optimal(e_I: float, alpha: float, gamma: float, imp: ImplementConfig,
               e_second: float, sigma: SigmaTerms) -> float:
    """Closed-form minimizer of the predicted-cost quadratic."""
    if sigma.sigma2 <= 0:
        raise ParameterError("sigma2 must be > 0 (empty horizon)")
    return -(e_I * sigma.sigma1 + alpha * gamma * imp.I_s * sigma.sigma2
             + e_second * sigma.sigma3 - e_I * sigma.sigma_e) / sigma.sigma2


def desired_heading(xi_d: float, alpha: float, gamma: float, imp: ImplementConfig) -> float:
    """Invert the change of variable xi = alpha (1 - gamma I_y) tan(theta)."""
    denom = 1.0 - gamma * imp.I_y
    if abs(denom) < SINGULARITY_EPS:
        raise SingularityError("1 - gamma*I_y ~ 0")
    if abs(alpha) < SINGULARITY_EPS:
        raise SingularityError("alpha ~ 0 in desired_heading")
    return math.atan(xi_d / (alpha * denom))


def steering_command(theta_tilde: float, theta_desired: float, curvature: float,
                     y: float, k_theta: float, wheelbase: float,
                     steer_limit: float) -> tuple[float, bool]:
    """Backstepping steering law tracking a desired heading; returns (delta, clamped)."""
    denom = 1.0 - curvature * y
    if abs(denom) < SINGULARITY_EPS:
        raise SingularityError("1 - c*y ~ 0 in steering_command")
    e_theta = theta_tilde - theta_desired
    raw = math.atan(wheelbase * (-k_theta * e_theta + curvature)
                    * math.cos(theta_tilde) / denom)
    clamped = abs(raw) > steer_limit
    return max(-steer_limit, min(steer_limit, raw)), clamped


def _steer_from_gamma(gamma: float, curvature: float, theta_tilde: float,
                      alpha: float, wheelbase: float) -> float:
    """Recover the measured steering angle from gamma and the current curvature."""
    return math.atan(wheelbase * (gamma + curvature * math.cos(theta_tilde) / alpha))


def optimal_control_step(meas: Measurements, params: OptimalParams,
                         imp: ImplementConfig, cfg: VehicleConfig) -> ControlCommand:
    """Two-stage optimal predictive step: closed-form desired heading, then steering."""
    alpha, gamma = alpha_gamma(meas, cfg.speed)
    th = meas.frenet.theta_tilde
    steer_now = _steer_from_gamma(gamma, meas.curvature_now, th, alpha, cfg.wheelbase)
    e2 = e_I_second(th, alpha, steer_now, meas.curvature_at_horizon, cfg.wheelbase)
    sigma = sigma_terms(params)
    xi_d = xi_optimal(meas.e_I, alpha, gamma, imp, e2, sigma)
    theta_d = desired_heading(xi_d, alpha, gamma, imp)
    delta, clamped = steering_command(th, theta_d, meas.curvature_now, meas.frenet.y,
                                      params.k_theta, cfg.wheelbase, cfg.steer_limit)
    e1 = e_I_prime(th, alpha, gamma, imp)
    return ControlCommand(
        delta_desired=delta, theta_desired=theta_d, xi_desired=xi_d, clamped=clamped,
        diagnostics={"e_I": meas.e_I, "e_I_prime": e1, "e_I_second": e2,
                     "alpha": alpha, "gamma": gamma, "n_h": params.n_h,
                     "J_residual": predicted_cost(xi_d, meas.e_I, alpha, gamma, imp, e2, params)},
    )


def backstepping_control_step(meas: Measurements, params: BaselineParams,
                              imp: ImplementConfig, cfg: VehicleConfig) -> ControlCommand:
    """Non-predictive baseline: pick the heading that enforces e_I' = -k_y e_I now."""
    alpha, gamma = alpha_gamma(meas, cfg.speed)
    denom = 1.0 - gamma * imp.I_y
    if abs(denom) < SINGULARITY_EPS:
        raise SingularityError("1 - gamma*I_y ~ 0")
    tan_theta_d = (-params.k_y * meas.e_I / alpha - gamma * imp.I_s) / denom
    theta_d = math.atan(tan_theta_d)
    delta, clamped = steering_command(meas.frenet.theta_tilde, theta_d, meas.curvature_now,
                                      meas.frenet.y, params.k_theta, cfg.wheelbase,
                                      cfg.steer_limit)
    return ControlCommand(delta_desired=delta, theta_desired=theta_d, clamped=clamped,
                          diagnostics={"e_I": meas.e_I, "alpha": alpha, "gamma": gamma})


def lateral_servoing_control_step(meas: Measurements, params: BaselineParams,
                                  imp: ImplementConfig, cfg: VehicleConfig) -> ControlCommand:
    """Baseline that servos the robot center toward the offset-corrected
    lateral reference y_d = y - e_I (put the implement on the path)."""
    alpha, _ = alpha_gamma(meas, cfg.speed)
    th = meas.frenet.theta_tilde
    ct = math.cos(th)
    y_err = meas.e_I  # y - y_d with y_d = y - e_I
    raw = math.atan(cfg.wheelbase * (meas.curvature_now * ct / alpha
                                     - params.k_theta * th - params.k_y * y_err * ct))
    clamped = abs(raw) > cfg.steer_limit
    delta = max(-cfg.steer_limit, min(cfg.steer_limit, raw))
    return ControlCommand(delta_desired=delta, theta_desired=0.0, clamped=clamped,
                          diagnostics={"e_I": meas.e_I, "alpha": alpha,
                                       "y_desired": meas.frenet.y - meas.e_I})


class Controller:
    """Stateful wrapper: holds parameters plus a fail-safe last-command cache.

    On a singularity the last valid command is re-issued with the fault flag
    set, so the actuator never sees a non-finite or unbounded value.
    """

    method = "base"
    horizon = 0.0  # preview distance requested from the measurement stage

    def _compute(self, meas: Measurements) -> ControlCommand:
        raise NotImplementedError

    def __init__(self):
        self._last = ControlCommand(delta_desired=0.0)

    def step(self, meas: Measurements) -> ControlCommand:
        try:
            cmd = self._compute(meas)
        except SingularityError:
            return ControlCommand(delta_desired=self._last.delta_desired,
                                  theta_desired=self._last.theta_desired,
                                  fault=True)
        self._last = cmd
        return cmd


class OptimalController(Controller):
    method = "optimal"

    def __init__(self, params: OptimalParams, imp: ImplementConfig, cfg: VehicleConfig):
        super().__init__()
        self.params, self.imp, self.cfg = params, imp, cfg
        self.horizon = params.s_h

    def _compute(self, meas):
        return optimal_control_step(meas, self.params, self.imp, self.cfg)


class BacksteppingController(Controller):
    """Non-predictive baseline. In closed loop the yaw-rate coupling term is
    dropped (gamma = 0 in stage 1): feeding the yaw rate implied by the
    measured steering angle straight back into the steering command forms an
    algebraic loop with gain |I_s| * k_theta, which exceeds 1 at the rear
    tuning and destabilizes the cascade. The term vanishes at every steady
    state anyway, so the e_I' = -k_y e_I design target is preserved there.
    """

    method = "backstepping"

    def __init__(self, params: BaselineParams, imp: ImplementConfig, cfg: VehicleConfig):
        super().__init__()
        self.params, self.imp, self.cfg = params, imp, cfg

    def _compute(self, meas):
        return backstepping_control_step(replace(meas, omega_bar=0.0),
                                         self.params, self.imp, self.cfg)


class LateralServoingController(Controller):
    method = "lateral_servoing"

    def __init__(self, params: BaselineParams, imp: ImplementConfig, cfg: VehicleConfig):
        super().__init__()
        self.params, self.imp, self.cfg = params, imp, cfg

    def _compute(self, meas):
        return lateral_servoing_control_step(meas, self.params, self.imp, self.cfg)
