"""Command-line entry point: map/park/verify/replay/plot subcommands.

Exit codes: 0 all executed checks pass, 1 failed checks, 2 usage errors
(unknown flags, missing files).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from ..mapping.map_io import MapFormatError, load_map
from ..firmware.stages import (
    golden_profile,
    run_stage,
    stage_equivalence,
    write_equivalence_report,
    write_trace,
)
from .metrics import compute_repeatability
from .navigation import navigate, run_mapping, run_replay_stage
from .plotting import read_trajectory_csv, render_svg
from .report import build_report, write_report
from .scenario import Scenario, Tolerances, load_perturbation, load_scenario


def _out_dir(args) -> Path:
    if args.out:
        return Path(args.out)
    env = os.environ.get("NIGELPARK_OUT")
    if env:
        return Path(env)
    return Path("nigelpark_out")


def _load_scenario(path: str, args) -> Scenario:
    try:
        scenario = load_scenario(path)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(2)
    tol = scenario.tolerances
    overrides = {}
    if getattr(args, "tol_xy", None) is not None:
        overrides["xy"] = args.tol_xy
    if getattr(args, "tol_yaw", None) is not None:
        overrides["yaw"] = args.tol_yaw
    if getattr(args, "tol_traj", None) is not None:
        overrides["trajectory"] = args.tol_traj
    if overrides:
        scenario = replace(scenario, tolerances=replace(tol, **overrides))
    if getattr(args, "trials", None) is not None:
        scenario = replace(scenario, trials=args.trials)
    if getattr(args, "stage", None) is not None:
        scenario = replace(scenario, stage=args.stage)
    return scenario


def _load_perturbation(path: str | None):
    if path is None:
        return None
    try:
        return load_perturbation(path)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(2)


def _print_trial(prefix: str, trial) -> None:
    err = trial.final_pose_error
    print(f"{prefix} seed={trial.seed}: {'PASS' if trial.goal_reached else 'FAIL'}"
          f" cause={trial.cause}"
          f" final_error=({err[0]:.4f} m, {err[1]:.4f} m, {err[2]:.4f} rad)"
          f" collisions={trial.collision_count} replans={trial.replan_count}")


def cmd_map(args) -> int:
    scenario = _load_scenario(args.scenario, args)
    out = _out_dir(args) / scenario.name / f"seed_{args.seed}"
    result = run_mapping(scenario, args.seed, out_dir=out)
    print(f"mapping seed={args.seed}: {'PASS' if result.success else 'FAIL'}"
          f" cause={result.cause}")
    if result.map_paths:
        print(f"map written: {result.map_paths[0]} / {result.map_paths[1]}")
    return 0 if result.success else 1


def cmd_park(args) -> int:
    scenario = _load_scenario(args.scenario, args)
    seed = args.seed if args.seed is not None else scenario.trial_seeds()[0]
    out = _out_dir(args) / scenario.name / f"seed_{seed}"
    trial = navigate(scenario, seed, out_dir=out)
    _print_trial("park", trial)
    return 0 if trial.goal_reached else 1


def cmd_verify(args) -> int:
    scenario = _load_scenario(args.scenario, args)
    out = _out_dir(args) / scenario.name
    perturbation = _load_perturbation(args.perturb)
    if scenario.stage == "replay" and args.map is None:
        print("error: verify --stage replay needs --map <recorded map prefix>",
              file=sys.stderr)
        return 2

    trials = []
    for seed in scenario.trial_seeds():
        trial_dir = out / f"seed_{seed}"
        if scenario.stage == "replay":
            trial = run_replay_stage(scenario, args.map, perturbation=perturbation,
                                     seed=seed, out_dir=trial_dir)
        else:
            trial = navigate(scenario, seed, out_dir=trial_dir,
                             perturbation=perturbation)
        trials.append(trial)
        _print_trial("trial", trial)

    repeatability = compute_repeatability(trials, scenario.tolerances.trajectory)
    print(f"repeatability: {'PASS' if repeatability.passed else 'FAIL'}"
          f" max={repeatability.max:.4f} m mean={repeatability.mean:.4f} m"
          f" std={repeatability.std:.4f} m (tolerance {repeatability.tolerance} m)")

    mil = run_stage("mil", golden_profile())
    sil = run_stage("sil", golden_profile())
    write_trace(mil, out / "firmware_mil_trace.csv")
    write_trace(sil, out / "firmware_sil_trace.csv")
    equivalence = stage_equivalence(mil, sil)
    write_equivalence_report(equivalence, out / "firmware_equivalence.json")
    print(f"firmware stage equivalence: {'PASS' if equivalence['pass'] else 'FAIL'}"
          f" max|dsteering|={equivalence['steering']['max']:.4g} rad"
          f" max|dwheel|={equivalence['wheel_rate']['max']:.4g} rad/s")

    report = build_report(scenario, trials, repeatability, equivalence)
    path = write_report(report, out / "report.json")
    print(f"report: {path}")
    print(f"overall: {'PASS' if report['overall_pass'] else 'FAIL'}")
    return 0 if report["overall_pass"] else 1


def cmd_replay(args) -> int:
    scenario = _load_scenario(args.scenario, args)
    perturbation = _load_perturbation(args.perturb)
    out = _out_dir(args) / f"{scenario.name}_replay"
    seeds = [args.seed] if args.seed is not None else list(scenario.trial_seeds())
    ok = True
    for seed in seeds:
        trial = run_replay_stage(scenario, args.map, perturbation=perturbation,
                                 seed=seed, out_dir=out / f"seed_{seed}")
        _print_trial("replay", trial)
        ok &= trial.goal_reached
    return 0 if ok else 1


def cmd_plot(args) -> int:
    log_path = Path(args.log)
    if not log_path.exists():
        print(f"error: log file not found: {log_path}", file=sys.stderr)
        return 2
    grid = None
    if args.map is not None:
        try:
            grid = load_map(args.map)
        except MapFormatError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    out = Path(args.out) if args.out else log_path.with_suffix(".svg")
    trajectory = read_trajectory_csv(log_path)
    path = render_svg(trajectory, grid, out)
    print(f"plot written: {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nigelpark",
        description="Deterministic 2D autonomous-parking stack and verification harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tolerances=True):
        p.add_argument("--out", help="output directory (default: $NIGELPARK_OUT or ./nigelpark_out)")
        if tolerances:
            p.add_argument("--tol-xy", type=float, dest="tol_xy")
            p.add_argument("--tol-yaw", type=float, dest="tol_yaw")
            p.add_argument("--tol-traj", type=float, dest="tol_traj")

    p_map = sub.add_parser("map", help="run a mapping tour and save the built map")
    p_map.add_argument("scenario")
    p_map.add_argument("--seed", type=int, default=1)
    common(p_map)
    p_map.set_defaults(func=cmd_map)

    p_park = sub.add_parser("park", help="run one seeded parking trial")
    p_park.add_argument("scenario")
    p_park.add_argument("--seed", type=int)
    common(p_park)
    p_park.set_defaults(func=cmd_park)

    p_verify = sub.add_parser("verify", help="full suite: trials, repeatability, "
                                             "firmware stage equivalence, report")
    p_verify.add_argument("scenario")
    p_verify.add_argument("--trials", type=int)
    p_verify.add_argument("--stage", choices=["virtual", "replay"])
    p_verify.add_argument("--map", help="recorded map prefix (replay stage)")
    p_verify.add_argument("--perturb", help="perturbation YAML")
    common(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_replay = sub.add_parser("replay", help="replay stage against a recorded map")
    p_replay.add_argument("scenario")
    p_replay.add_argument("--map", required=True, help="recorded map prefix")
    p_replay.add_argument("--perturb", help="perturbation YAML")
    p_replay.add_argument("--seed", type=int)
    common(p_replay)
    p_replay.set_defaults(func=cmd_replay)

    p_plot = sub.add_parser("plot", help="render a trajectory log over the map as SVG")
    p_plot.add_argument("log")
    p_plot.add_argument("--map", help="map prefix for the raster underlay")
    p_plot.add_argument("--out")
    p_plot.set_defaults(func=cmd_plot)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
