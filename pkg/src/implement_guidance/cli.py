"""Command-line front end.

Commands: run, compare, sweep, validate. Exit codes: 0 success, 2 scenario
validation error, 3 simulation fault, 1 unexpected error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .controllers import OptimalParams
from .errors import GuidanceError, ScenarioError
from .harness import (
    NoiseSpec,
    Scenario,
    initial_lateral_for_error,
    run_and_summarize,
    summarize,
    write_csv,
)
from .paths import build_experiment_path
from .presets import TABLE1, TABLE2
from .scenario_io import parse_scenario, resolved_config
from .svgplot import comparison_figure, sweep_figure
from .vehicle import VehicleConfig

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_VALIDATION = 2
EXIT_FAULT = 3

OUT_DIR_ENV = "IMPLEMENT_GUIDANCE_OUT_DIR"


def _out_dir(args) -> str:
    out = args.out_dir or os.environ.get(OUT_DIR_ENV) or "out"
    os.makedirs(out, exist_ok=True)
    return out


def _command_line() -> str:
    return "implement-guidance " + " ".join(sys.argv[1:])


def _write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _default_scenario(preset: str, seed: int, noise: bool) -> Scenario:
    path = build_experiment_path(preset)
    imp, params = TABLE1[("optimal", "rear")]
    return Scenario(
        path=path, vehicle=VehicleConfig(), implement=imp,
        method="optimal", params=params,
        run_length=math.floor(path.total_length - 1.0),
        initial_y=initial_lateral_for_error(0.5, imp),
        seed=seed, noise=NoiseSpec(enabled=noise))


def cmd_run(args) -> int:
    out = _out_dir(args)
    try:
        with open(args.scenario) as fh:
            text = fh.read()
        scn = parse_scenario(text, seed_override=args.seed,
                             noise_override=_noise_flag(args))
    except OSError as exc:
        print(f"error: cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    log, summary = run_and_summarize(scn)
    with open(os.path.join(out, "run.csv"), "w") as fh:
        write_csv(log, fh)
    payload = summary.to_dict()
    payload["fault"] = log.fault
    payload["scenario"] = resolved_config(scn)
    _write_json(os.path.join(out, "summary.json"), payload)
    if log.fault:
        print(f"simulation fault: {log.fault}", file=sys.stderr)
        return EXIT_FAULT
    return EXIT_OK


def _run_one_comparison(path, placement, method, seed, noise):
    imp, params = TABLE1[(method, placement)]
    scn = Scenario(
        path=path, vehicle=VehicleConfig(), implement=imp,
        method=method, params=params,
        run_length=math.floor(path.total_length - 1.0),
        initial_y=initial_lateral_for_error(0.5, imp),
        seed=seed, noise=NoiseSpec(enabled=noise))
    log, summary = run_and_summarize(scn)
    return placement, method, log, summary


def cmd_compare(args) -> int:
    out = _out_dir(args)
    path = build_experiment_path("exp1")
    placements = [args.placement] if args.placement else ["front", "rear"]
    methods = ["lateral_servoing", "backstepping", "optimal"]
    jobs = max(1, args.jobs)
    noise = _noise_flag(args) or False
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_one_comparison, path, p, m, args.seed or 0, noise)
                   for p in placements for m in methods]
        results = [f.result() for f in futures]
    rows = []
    per_placement: dict[str, dict] = {}
    for placement, method, log, summary in results:
        csv_name = f"run_{placement}_{method}.csv"
        with open(os.path.join(out, csv_name), "w") as fh:
            write_csv(log, fh)
        rows.append({
            "method": method, "placement": placement,
            "reconstruction": method != "optimal",
            "summary": summary.to_dict(),
            "max_junction_overshoot_m":
                max(summary.junction_overshoot.values()) if summary.junction_overshoot else 0.0,
            "fault": log.fault, "csv": csv_name,
        })
        per_placement.setdefault(placement, {})[method] = {
            "s": list(log.column("s")), "e": list(log.column("e_I_exact")),
            "summary": summary.to_dict(),
        }
    ratios = {}
    for placement in placements:
        by_method = {r["method"]: r["max_junction_overshoot_m"] for r in rows
                     if r["placement"] == placement}
        for baseline in ("backstepping", "lateral_servoing"):
            if by_method.get(baseline):
                ratios[f"{placement}_optimal_vs_{baseline}"] = (
                    by_method["optimal"] / by_method[baseline])
    _write_json(os.path.join(out, "comparison.json"),
                {"configurations": rows, "overshoot_ratios": ratios})
    with open(os.path.join(out, "figure4.svg"), "w") as fh:
        fh.write(comparison_figure(per_placement, path.junctions(), _command_line()))
    if any(r["fault"] for r in rows):
        return EXIT_FAULT
    return EXIT_OK


def _run_one_sweep(path, params, seed, noise):
    imp, _ = TABLE1[("optimal", "rear")]
    scn = Scenario(
        path=path, vehicle=VehicleConfig(), implement=imp,
        method="optimal", params=params,
        run_length=math.floor(path.total_length - 1.0),
        initial_y=initial_lateral_for_error(0.5, imp),
        seed=seed, noise=NoiseSpec(enabled=noise))
    log, summary = run_and_summarize(scn)
    return params, log, summary


def cmd_sweep(args) -> int:
    out = _out_dir(args)
    path = build_experiment_path("exp2")
    rows = TABLE2
    if args.horizons:
        try:
            wanted = {float(h) for h in args.horizons.split(",")}
        except ValueError:
            print(f"error: bad --horizons value {args.horizons!r}", file=sys.stderr)
            return EXIT_VALIDATION
        rows = [p for p in TABLE2 if p.s_h in wanted]
        if not rows:
            print("error: no Table II row matches --horizons", file=sys.stderr)
            return EXIT_VALIDATION
    jobs = max(1, args.jobs)
    noise = _noise_flag(args) or False
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_one_sweep, path, p, args.seed or 0, noise)
                   for p in rows]
        results = sorted((f.result() for f in futures), key=lambda r: r[0].s_h)
    points = []
    for params, log, summary in results:
        d = summary.to_dict()
        d.update(s_h_m=params.s_h, lambda_per_m=params.lam,
                 k_theta_per_m=params.k_theta, s_t_m=params.s_t, fault=log.fault)
        points.append(d)
    best = min(points, key=lambda p: p["median_abs_e_m"])
    _write_json(os.path.join(out, "sweep.json"),
                {"points": points, "argmin_s_h_m": best["s_h_m"]})
    with open(os.path.join(out, "figure6.svg"), "w") as fh:
        fh.write(sweep_figure(points, _command_line()))
    if any(p["fault"] for p in points):
        return EXIT_FAULT
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        with open(args.scenario) as fh:
            text = fh.read()
        scn = parse_scenario(text)
    except OSError as exc:
        print(f"error: cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    json.dump(resolved_config(scn), sys.stdout, indent=2, sort_keys=True)
    print()
    return EXIT_OK


def _noise_flag(args):
    if args.noise is None:
        return None
    return args.noise == "on"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="implement-guidance",
        description="Path-following control toolkit for an offset implement point")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--out-dir", default=None,
                        help=f"output directory (default: ${OUT_DIR_ENV} or ./out)")
    parser.add_argument("--jobs", type=int, default=1, help="parallel runs for sweeps/comparisons")
    parser.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    parser.add_argument("--noise", choices=["on", "off"], default=None,
                        help="override the scenario noise switch")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("scenario")
    p_run.set_defaults(func=cmd_run)
    p_cmp = sub.add_parser("compare", help="run the experiment-1 method comparison")
    p_cmp.add_argument("--placement", choices=["front", "rear"], default=None)
    p_cmp.set_defaults(func=cmd_compare)
    p_swp = sub.add_parser("sweep", help="run the prediction-horizon sweep")
    p_swp.add_argument("--horizons", default=None,
                       help="comma-separated s_h values to keep, e.g. 1.0,2.0")
    p_swp.set_defaults(func=cmd_sweep)
    p_val = sub.add_parser("validate", help="validate a scenario file without running")
    p_val.add_argument("scenario")
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GuidanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"unexpected error: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
