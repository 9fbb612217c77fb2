"""Closed-loop experiment harness: scenario runs, summaries, sweeps, comparisons.

Runs are deterministic given the scenario seed. The plant advances at dt;
the controller is invoked every control period with a zero-order hold on the
steering command in between. All summary statistics are computed from the
ground-truth implement error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .controllers import (
    BacksteppingController,
    BaselineParams,
    Controller,
    LateralServoingController,
    OptimalController,
    OptimalParams,
)
from .errors import ParameterError, SingularityError
from .paths import FrenetState, ReferencePath
from .presets import TABLE1, TABLE2, REAR_IMPLEMENT
from .vehicle import (
    ImplementConfig,
    VehicleConfig,
    implement_error_exact,
    implement_error_measured,
    measure,
    pose_on_path,
    step,
)

CSV_HEADER = ("t_s,s_m,y_m,theta_tilde_rad,e_I_exact_m,e_I_measured_m,"
              "delta_cmd_rad,delta_actual_rad,theta_d_rad,segment,fault")


@dataclass(frozen=True)
class NoiseSpec:
    enabled: bool = False
    y_std: float = 0.01          # m
    theta_std: float = 0.005     # rad
    omega_std: float = 0.01     # rad/s


@dataclass(frozen=True)
class Scenario:
    path: ReferencePath
    vehicle: VehicleConfig
    implement: ImplementConfig
    method: str                          # optimal | backstepping | lateral_servoing
    params: OptimalParams | BaselineParams
    run_length: float                    # m
    dt: float = 0.01
    control_period: float = 0.1
    initial_s: float = 0.0
    initial_y: float = 0.0
    initial_theta: float = 0.0
    seed: int = 0
    noise: NoiseSpec = NoiseSpec()

    def __post_init__(self):
        if self.run_length > self.path.total_length:
            raise ParameterError("run_length exceeds path total_length")
        ratio = self.control_period / self.dt
        if self.control_period < self.dt or abs(ratio - round(ratio)) > 1e-9:
            raise ParameterError("control_period must be an integer multiple of dt")

    def make_controller(self) -> Controller:
        if self.method == "optimal":
            return OptimalController(self.params, self.implement, self.vehicle)
        if self.method == "backstepping":
            return BacksteppingController(self.params, self.implement, self.vehicle)
        if self.method == "lateral_servoing":
            return LateralServoingController(self.params, self.implement, self.vehicle)
        raise ParameterError(f"unknown controller method {self.method!r}")


@dataclass(frozen=True)
class LogRecord:
    t: float
    s: float
    y: float
    theta_tilde: float
    e_I_exact: float
    e_I_measured: float
    delta_cmd: float
    delta_actual: float
    theta_d: float
    segment: str
    fault: bool


@dataclass
class RunLog:
    records: list[LogRecord] = field(default_factory=list)
    fault: str | None = None   # fault description when the run aborted

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


@dataclass(frozen=True)
class RunSummary:
    median_abs_e: float
    q25: float
    q75: float
    max_abs_e: float
    per_segment_median: dict
    junction_overshoot: dict     # junction abscissa (str key) -> max |e_I| in window
    fault_count: int
    n_samples: int

    def to_dict(self) -> dict:
        return {
            "median_abs_e_m": self.median_abs_e,
            "q25_m": self.q25,
            "q75_m": self.q75,
            "max_abs_e_m": self.max_abs_e,
            "per_segment_median_m": self.per_segment_median,
            "junction_overshoot_m": self.junction_overshoot,
            "fault_count": self.fault_count,
            "n_samples": self.n_samples,
        }


def initial_lateral_for_error(e_I: float, imp: ImplementConfig) -> float:
    """Lateral offset of the robot center that puts the measured implement
    error at e_I with zero heading deviation."""
    return e_I - imp.I_y


def run_scenario(scn: Scenario) -> RunLog:
    """Simulate one closed-loop run; never raises on a model fault, the log
    is truncated with the fault recorded instead."""
    path = scn.path
    controller = scn.make_controller()
    rng = np.random.default_rng(scn.seed)
    pose = pose_on_path(path, scn.initial_s, scn.initial_y, scn.initial_theta)
    frenet = FrenetState(s=scn.initial_s, y=scn.initial_y, theta_tilde=scn.initial_theta)
    log = RunLog()
    n_ctrl = round(scn.control_period / scn.dt)
    max_steps = int(3 * scn.run_length / (scn.vehicle.speed * scn.dt)) + n_ctrl
    delta_cmd = 0.0
    theta_d = 0.0
    t = 0.0
    for i in range(max_steps):
        if i % n_ctrl == 0:
            try:
                meas = measure(pose, frenet, path, scn.vehicle, scn.implement,
                               controller.horizon)
            except SingularityError as exc:
                log.fault = str(exc)
                _append(log, t, pose, frenet, scn, path, delta_cmd, theta_d, fault=True)
                break
            if scn.noise.enabled:
                noisy = FrenetState(s=meas.frenet.s,
                                    y=meas.frenet.y + rng.normal(0.0, scn.noise.y_std),
                                    theta_tilde=meas.frenet.theta_tilde
                                    + rng.normal(0.0, scn.noise.theta_std))
                meas = replace(meas, frenet=noisy,
                               omega_bar=meas.omega_bar + rng.normal(0.0, scn.noise.omega_std),
                               e_I=implement_error_measured(noisy, scn.implement))
            cmd = controller.step(meas)
            delta_cmd = cmd.delta_desired
            theta_d = cmd.theta_desired
            if cmd.fault:
                log.fault = "controller singularity fail-safe"
                _append(log, t, pose, frenet, scn, path, delta_cmd, theta_d, fault=True)
                break
        _append(log, t, pose, frenet, scn, path, delta_cmd, theta_d, fault=False)
        if frenet.s >= scn.run_length:
            break
        try:
            pose, frenet = step(pose, frenet, delta_cmd, scn.dt, path, scn.vehicle)
        except SingularityError as exc:
            log.fault = str(exc)
            t += scn.dt
            _append(log, t, pose, frenet, scn, path, delta_cmd, theta_d, fault=True)
            break
        t += scn.dt
    return log


def _append(log, t, pose, frenet, scn, path, delta_cmd, theta_d, fault):
    log.records.append(LogRecord(
        t=t, s=frenet.s, y=frenet.y, theta_tilde=frenet.theta_tilde,
        e_I_exact=implement_error_exact(pose, scn.implement, path),
        e_I_measured=implement_error_measured(frenet, scn.implement),
        delta_cmd=delta_cmd, delta_actual=pose.steer, theta_d=theta_d,
        segment=path.segment_label(min(frenet.s, path.total_length)),
        fault=fault,
    ))


def summarize(log: RunLog, junctions: tuple[float, ...] = (), horizon: float = 0.0,
              skip_s: float = 5.0, window_pad: float = 3.0) -> RunSummary:
    """Statistics over |e_I_exact|, excluding the initial convergence window.

    Quantiles use linear interpolation between order statistics. The junction
    overshoot is the max |e_I| within +/- (horizon + window_pad) of each
    curvature discontinuity.
    """
    if not log.records:
        raise ParameterError("cannot summarize an empty log")
    s = log.column("s")
    e = np.abs(log.column("e_I_exact"))
    keep = s >= s[0] + skip_s
    sample = e[keep] if keep.any() else e
    per_segment = {}
    for r in log.records:
        per_segment.setdefault(r.segment, []).append(abs(r.e_I_exact))
    overshoot = {}
    for sj in junctions:
        win = np.abs(s - sj) <= horizon + window_pad
        if win.any():
            overshoot[f"{sj:.6g}"] = float(e[win].max())
    return RunSummary(
        median_abs_e=float(np.quantile(sample, 0.5, method="linear")),
        q25=float(np.quantile(sample, 0.25, method="linear")),
        q75=float(np.quantile(sample, 0.75, method="linear")),
        max_abs_e=float(sample.max()),
        per_segment_median={k: float(np.median(v)) for k, v in per_segment.items()},
        junction_overshoot=overshoot,
        fault_count=sum(1 for r in log.records if r.fault),
        n_samples=int(sample.size),
    )


def run_and_summarize(scn: Scenario) -> tuple[RunLog, RunSummary]:
    log = run_scenario(scn)
    horizon = scn.params.s_h if isinstance(scn.params, OptimalParams) else 0.0
    return log, summarize(log, junctions=scn.path.junctions(), horizon=horizon)


def sweep_horizon(base: Scenario, rows: list[OptimalParams] | None = None
                  ) -> list[tuple[float, RunSummary]]:
    """One run per horizon row on the base scenario's path; rear implement.

    Per-row faults are recorded in the summaries and the sweep continues.
    """
    rows = TABLE2 if rows is None else rows
    results = []
    for params in sorted(rows, key=lambda p: p.s_h):
        scn = replace(base, method="optimal", params=params, implement=REAR_IMPLEMENT,
                      initial_y=initial_lateral_for_error(0.5, REAR_IMPLEMENT))
        _, summary = run_and_summarize(scn)
        results.append((params.s_h, summary))
    return results


def compare_methods(scn_template: Scenario, placements: tuple[str, ...] = ("front", "rear"),
                    methods: tuple[str, ...] = ("lateral_servoing", "backstepping", "optimal")
                    ) -> list[dict]:
    """Run each method/placement with its experiment-1 preset on the template
    path and report summaries plus junction overshoots."""
    results = []
    for placement in placements:
        for method in methods:
            imp, params = TABLE1[(method, placement)]
            scn = replace(scn_template, method=method, params=params, implement=imp,
                          initial_y=initial_lateral_for_error(0.5, imp))
            log, summary = run_and_summarize(scn)
            results.append({
                "method": method,
                "placement": placement,
                "reconstruction": method != "optimal",
                "summary": summary.to_dict(),
                "max_junction_overshoot_m":
                    max(summary.junction_overshoot.values()) if summary.junction_overshoot else 0.0,
                "fault": log.fault,
            })
    return results


def write_csv(log: RunLog, fh) -> None:
    """Write the log in the documented CSV schema; floats use shortest
    round-trip formatting so write -> parse -> write is byte-identical."""
    fh.write(CSV_HEADER + "\n")
    for r in log.records:
        fh.write(",".join([
            repr(r.t), repr(r.s), repr(r.y), repr(r.theta_tilde),
            repr(r.e_I_exact), repr(r.e_I_measured),
            repr(r.delta_cmd), repr(r.delta_actual), repr(r.theta_d),
            r.segment, "1" if r.fault else "0",
        ]) + "\n")


def read_csv(fh) -> RunLog:
    header = fh.readline().rstrip("\n")
    if header != CSV_HEADER:
        raise ParameterError(f"unexpected CSV header: {header!r}")
    log = RunLog()
    for line in fh:
        parts = line.rstrip("\n").split(",")
        vals = [float(p) for p in parts[:9]]
        log.records.append(LogRecord(*vals, segment=parts[9], fault=parts[10] == "1"))
    return log
