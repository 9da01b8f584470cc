"""Command-line interface.

Verbs:
    run CONFIG                 execute a scenario (path or bundled name)
    compare REPORT_A REPORT_B  slope comparison between two report.json files
    profile-distortion CONFIG WORD
                               norms of powers of WORD plus the staircase

Exit codes: 0 all checks pass, 2 check violations found, 1 execution error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import CircleEntropyError
from .pipeline import compare_reports, run_scenario
from .scenario import bundled_names, bundled_scenario, load_scenario
from .words import distortion_profile, enumerate_ball


def _resolve_scenario(arg: str):
    path = Path(arg)
    if path.exists():
        return load_scenario(path)
    if arg in bundled_names():
        return bundled_scenario(arg)
    raise CircleEntropyError(
        f"{arg!r} is neither a config file nor a bundled scenario "
        f"({', '.join(bundled_names())})"
    )


def _cmd_run(args) -> int:
    scenario = _resolve_scenario(args.config)
    outdir = args.out or f"{scenario.name}-artifacts"
    report = run_scenario(scenario, outdir, workers=args.workers,
                          dump_ball=args.dump_ball)
    failed = [v for v in report.verdicts if not v["passed"]]
    print(f"scenario {scenario.name}: {len(report.verdicts)} checks, "
          f"{len(failed)} failures; artifacts in {outdir}")
    for v in failed:
        print(f"  FAIL {v['name']}: {v['detail']}")
    return 0 if not failed else 2


def _cmd_compare(args) -> int:
    with open(args.report_a) as fh:
        a = json.load(fh)
    with open(args.report_b) as fh:
        b = json.load(fh)
    result = compare_reports(a, b, args.slope_tolerance)
    for p in result["pairs"]:
        print(f"{p['scope']} eps={p['epsilon']:g}: "
              f"|{p['slope_a']:.4f} - {p['slope_b']:.4f}| = {p['difference']:.4f} "
              f"-> {p['verdict']}")
    print(result["note"])
    return 0 if result["consistent"] else 2


def _cmd_profile(args) -> int:
    scenario = _resolve_scenario(args.config)
    system = scenario.validate()
    letters = system.parse_word(args.word)
    depth = args.depth or 2 * args.r_max
    ball = enumerate_ball(system, depth, scenario.fingerprint,
                          scenario.max_ball_size)
    profile = distortion_profile(system, letters, args.r_max, depth, ball)
    print("r,norm")
    for r, v in profile.rows:
        print(f"{r},{'censored' if v is None else v}")
    print("staircase q_hat(n) for n = 0..%d:" % profile.n_max)
    print(",".join(str(q) for q in profile.q_hat))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("r,norm\n")
            for r, v in profile.rows:
                fh.write(f"{r},{'' if v is None else v}\n")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="circle-entropy",
        description="entropy estimation for group actions on the circle",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario end to end")
    p_run.add_argument("config", help="config file path or bundled scenario name")
    p_run.add_argument("--out", default=None, help="artifact directory")
    p_run.add_argument("--workers", type=int, default=1,
                       help="parallelism cap (results are schedule-independent)")
    p_run.add_argument("--dump-ball", action="store_true",
                       help="also write ball.csv (norm, word, fingerprint hash)")
    p_run.set_defaults(fn=_cmd_run)

    p_cmp = sub.add_parser("compare", help="compare two run reports")
    p_cmp.add_argument("report_a")
    p_cmp.add_argument("report_b")
    p_cmp.add_argument("--slope-tolerance", type=float, default=0.1)
    p_cmp.set_defaults(fn=_cmd_compare)

    p_prof = sub.add_parser("profile-distortion",
                            help="word-norm growth of powers of a word")
    p_prof.add_argument("config")
    p_prof.add_argument("word", help="generator names, e.g. 'g g g^-1'")
    p_prof.add_argument("--r-max", type=int, default=20)
    p_prof.add_argument("--depth", type=int, default=None,
                        help="ball search depth (default 2 r_max)")
    p_prof.add_argument("--out", default=None, help="optional CSV output path")
    p_prof.set_defaults(fn=_cmd_profile)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CircleEntropyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
