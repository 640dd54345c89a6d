"""``optspoof`` command line.

Exit codes: 0 success, 2 validation error, 3 infeasible attack under
``--strict-feasibility``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .._validation import ValidationError
from ..attack import LimitingScenario, limiting_scenario_classify, synthesize_optimal
from ..channel import channels_for, kernel_condition
from ..detect import Detector
from ..divergence import bound_curve, policy_divergence
from ..scenario import load_scenario
from .io import atomic_write_text, rows_to_csv, write_record_csv
from .sweep import load_sweep, run_point, run_sweep

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3

_NOTES = {
    LimitingScenario.S1_MEACONING: "S1: forged and attacker delays coincide (meaconing); undetectable",
    LimitingScenario.S2_SINGLE_SV: "S2: single satellite; a pure delay cannot be detected",
    LimitingScenario.S3_DEGRADED: "S3: optimal attack reproduces Bob's statistics exactly",
    LimitingScenario.GENERAL: "general geometry",
}


class _Infeasible(Exception):
    def __init__(self, margin):
        super().__init__(f"attack infeasible (margin {margin:.6g}) under --strict-feasibility")


def _global_flags() -> argparse.ArgumentParser:
    # SUPPRESS defaults so a flag given before the subcommand is not
    # overwritten by the subparser's own copy
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="override scenario seed")
    p.add_argument("--trials", type=int, default=argparse.SUPPRESS,
                   help="override Monte-Carlo trials per hypothesis")
    p.add_argument("--out", type=Path, default=argparse.SUPPRESS, help="output directory")
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads")
    p.add_argument("--strict-feasibility", action="store_true", default=argparse.SUPPRESS,
                   help="exit 3 when the optimal attack is infeasible")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="optspoof", parents=[common],
                                     description="Optimal spoofing analytics and DET simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="divergence report of a scenario")
    p.add_argument("scenario", type=Path)

    p = sub.add_parser("det", parents=[common], help="Monte-Carlo DET curve (CSV + SVG)")
    p.add_argument("scenario", type=Path)
    p.add_argument("--detector", choices=[d.value for d in Detector], default="lrt")
    p.add_argument("--thresholds", choices=["auto", "quantile"], default="auto")

    p = sub.add_parser("sweep", parents=[common], help="DET curves along one parameter axis")
    p.add_argument("spec", type=Path)

    p = sub.add_parser("bound", parents=[common], help="tabulate the minimum miss rate for divergence D")
    p.add_argument("--d", type=float, required=True, dest="d")
    p.add_argument("--points", type=int, default=13, help="log-spaced alpha values in [1e-6, 1]")
    return parser


def _options(args):
    return {
        "seed": getattr(args, "seed", None),
        "trials": getattr(args, "trials", None),
        "out": getattr(args, "out", Path("results")),
        "threads": getattr(args, "threads", 1),
        "strict": getattr(args, "strict_feasibility", False),
    }


def _scenario(path, opts):
    scenario = load_scenario(path)
    changes = {k: opts[k] for k in ("seed", "trials") if opts[k] is not None}
    return scenario.replace(**changes) if changes else scenario


def analyze_record(scenario) -> dict:
    """Flat record printed and persisted by ``analyze``."""
    A, F = channels_for(scenario)
    policy, feas = synthesize_optimal(A, F, scenario)
    report = policy_divergence(A.matrix, policy, scenario)
    case = limiting_scenario_classify(A, F, scenario)
    return {
        "m": scenario.m,
        "n": scenario.n,
        "snr_sb_db": scenario.snr_sb_db,
        "snr_se_db": scenario.snr_se_db,
        **report.as_record(),
        "feasible": feas.feasible,
        "margin": feas.margin,
        "lambda_max": feas.lambda_max,
        "kernel_condition": kernel_condition(A, F),
        "classification": case.value,
        "note": _NOTES[case],
    }


def cmd_analyze(args, opts) -> int:
    scenario = _scenario(args.scenario, opts)
    record = analyze_record(scenario)
    for key, value in record.items():
        print(f"{key:>18}: {value:.10g}" if isinstance(value, float) else f"{key:>18}: {value}")
    write_record_csv(record, opts["out"] / f"{args.scenario.stem}_analysis.csv")
    if opts["strict"] and not record["feasible"]:
        raise _Infeasible(record["margin"])
    return EXIT_OK


def cmd_det(args, opts) -> int:
    scenario = _scenario(args.scenario, opts)
    if opts["strict"]:
        _, feas = synthesize_optimal(*channels_for(scenario), scenario)
        if not feas.feasible:
            raise _Infeasible(feas.margin)
    stem = f"{args.scenario.stem}_{args.detector}"
    curve, report, feas, files = run_point(scenario, args.detector, opts["out"], stem,
                                           thresholds=args.thresholds, threads=opts["threads"])
    viol = curve.bound_violations()
    print(f"detector {args.detector}  trials {curve.trials}  D {report.f_exact:.6g}  "
          f"points {len(curve.alpha)}  bound violations {len(viol)}")
    for kind, name in files.items():
        print(f"{kind:>7}: {opts['out'] / name}")
    return EXIT_OK


def cmd_sweep(args, opts) -> int:
    spec = load_sweep(args.spec, outputs=getattr(args, "out", None) and opts["out"],
                      seed=opts["seed"], trials=opts["trials"])
    manifest = run_sweep(spec, threads=opts["threads"], strict=opts["strict"])
    failed = [p for p in manifest["points"] if p["status"] != "ok"]
    for p in manifest["points"]:
        d = p["report"]["f_exact"] if p["status"] == "ok" else float("nan")
        print(f"{p['label']:>24}  {p['status']:>5}  D={d:.6g}" + (f"  {p['error']}" if p["status"] != "ok" else ""))
    print(f"manifest: {spec.outputs / 'manifest.json'}")
    if opts["strict"] and any("infeasible" in p.get("error", "") for p in failed):
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_bound(args, opts) -> int:
    if not np.isfinite(args.d) or args.d < 0:
        raise ValidationError("d", "D must be a finite non-negative number")
    if args.points < 2:
        raise ValidationError("points", "points must be ≥ 2")
    alphas = np.logspace(-6, 0, args.points)
    table = bound_curve(args.d, alphas)
    text = rows_to_csv([{"alpha": f"{a:.6g}", "beta_min": f"{b:.6g}"} for a, b in table])
    sys.stdout.write(text)
    if getattr(args, "out", None) is not None:
        atomic_write_text(opts["out"] / f"bound_D{args.d:g}.csv", text)
    return EXIT_OK


_COMMANDS = {"analyze": cmd_analyze, "det": cmd_det, "sweep": cmd_sweep, "bound": cmd_bound}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    opts = _options(args)
    try:
        if opts["threads"] < 1:
            raise ValidationError("threads", "threads must be ≥ 1")
        if opts["trials"] is not None and opts["trials"] < 1:
            raise ValidationError("trials", "trials must be ≥ 1")
        return _COMMANDS[args.command](args, opts)
    except _Infeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValidationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
