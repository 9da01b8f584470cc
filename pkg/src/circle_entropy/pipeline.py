"""Scenario orchestration: balls, curves, approximation, gap calculus, reports.

The pipeline runs the stages in order, flushes artifacts as each stage
completes, and finishes by writing a MANIFEST with content hashes and a
completeness flag. Reports contain only deterministic data (timings go to
stderr), so identical configurations produce byte-identical artifacts.

Artifacts: report.json, curves.csv, omega.csv, gaps.csv, lemmas.json,
MANIFEST. Exit semantics for the CLI: 0 when every recorded verdict passed,
2 when some check failed, 1 on execution errors.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import domains as dom
from .errors import CensoredValueError, CircleEntropyError, ConfigurationError
from .geometry import uniform_grid
from .scenario import Scenario
from .separation import (
    build_separation_profile,
    check_restriction_inequality,
    entropy_at_scale,
    max_separated_greedy,
    restricted_entropy,
)
from .wandering import approximate_nonwandering, classify_all, gap_components
from .words import distortion_profile, enumerate_ball, free_ball_count

__all__ = ["RunReport", "run_scenario", "compare_within", "compare_reports",
           "ARTIFACT_NAMES"]

ARTIFACT_NAMES = ("report.json", "curves.csv", "omega.csv", "gaps.csv", "lemmas.json")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    return obj


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, sort_keys=True, indent=2)
        fh.write("\n")


class RunReport:
    """In-memory result of a scenario run; ``data`` mirrors report.json."""

    def __init__(self, data: dict, lemma_reports: list[dict]):
        self.data = data
        self.lemma_reports = lemma_reports

    @property
    def verdicts(self) -> list[dict]:
        return self.data["verdicts"]

    @property
    def passed(self) -> bool:
        return all(v["passed"] for v in self.verdicts)


def _curve_rows_csv(curves: list[dict]) -> str:
    lines = ["scope,epsilon,n,s_lower,eq1_ceiling,slope_window_lo,slope_window_hi,slope"]
    for c in curves:
        lo, hi = c["window"]
        for n, s, ceil in c["rows"]:
            lines.append(
                f"{c['scope']},{c['epsilon']!r},{n},{s},{ceil!r},{lo},{hi},{c['slope']!r}"
            )
    return "\n".join(lines) + "\n"


def _omega_csv(omega: dict) -> str:
    lines = ["left,length"]
    for left, length in omega["arcs"]:
        lines.append(f"{left!r},{length!r}")
    return "\n".join(lines) + "\n"


def _gaps_csv(gap_rows: list[dict]) -> str:
    lines = ["left,length,kind,stabilizer_word,k_flag"]
    for g in gap_rows:
        stab = g["stabilizer_word"] or ""
        lines.append(f"{g['left']!r},{g['length']!r},{g['kind']},{stab},{int(g['k_flag'])}")
    return "\n".join(lines) + "\n"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def run_scenario(scenario: Scenario, outdir, workers: int = 1,
                 dump_ball: bool = False) -> RunReport:
    """Execute the full pipeline and write artifacts into ``outdir``.

    ``workers`` caps stage parallelism; the implementation is vectorized and
    schedule-independent, so any value yields identical artifacts.
    """
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    manifest = {"scenario": scenario.name, "complete": False, "error": None, "files": {}}

    def flush(name: str, content: str | None = None, obj=None) -> None:
        path = out / name
        if content is not None:
            path.write_text(content)
        else:
            _write_json(path, obj)
        manifest["files"][name] = _sha256(path)
        _write_json(out / "MANIFEST", manifest)

    try:
        report = _run_stages(scenario, flush, dump_ball, out)
        manifest["complete"] = True
        _write_json(out / "MANIFEST", manifest)
        _log(f"[{scenario.name}] finished in {time.perf_counter() - t0:.1f}s, "
             f"{'PASS' if report.passed else 'CHECK FAILURES'}")
        return report
    except CircleEntropyError as exc:
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        _write_json(out / "MANIFEST", manifest)
        raise


def _run_stages(scenario: Scenario, flush, dump_ball: bool, out: Path) -> RunReport:
    system = scenario.validate()
    verdicts: list[dict] = []
    lemma_reports: list[dict] = []

    ball_depth = scenario.ball_depth()
    _log(f"[{scenario.name}] enumerating ball to depth {ball_depth}")
    ball = enumerate_ball(system, ball_depth, scenario.fingerprint,
                          scenario.max_ball_size)
    if dump_ball:
        from .words import dump_ball_csv

        dump_ball_csv(ball, out / "ball.csv")
    ball_info = {
        "depth": ball.depth,
        "sizes": [ball.size_at(n) for n in range(ball.depth + 1)],
        "free_counts": [free_ball_count(system.pair_count, n)
                        for n in range(ball.depth + 1)],
        "merges": ball.merges,
        "dedup_margin": (None if math.isinf(ball.min_separation_margin)
                         else ball.min_separation_margin),
        "fingerprint": ball.spec.ref(),
    }

    _log(f"[{scenario.name}] approximating the non-wandering set")
    approx = approximate_nonwandering(ball, scenario.n_omega, scenario.delta)
    omega_info = {
        "arcs": [[a.left, a.length] for a in approx.arcs],
        "full_circle": approx.full_circle,
        "total_length": approx.total_length,
        "depth": approx.depth,
        "resolution": approx.resolution,
        "ball_ref": approx.ball_ref,
    }
    flush("omega.csv", content=_omega_csv(omega_info))

    tau_fix = scenario.tau_fix_factor * approx.resolution
    primary_eps = scenario.epsilon_list[0]
    if approx.full_circle:
        gaps = []
    else:
        gaps = gap_components(approx, primary_eps)
        gaps = classify_all(gaps, ball, scenario.classification_depth, tau_fix)
    gap_rows = [{
        "left": g.arc.left,
        "length": g.arc.length,
        "kind": g.kind,
        "stabilizer_word": (system.word_label(g.stabilizer.word)
                            if g.stabilizer else None),
        "stabilizer_norm": g.stabilizer.norm if g.stabilizer else None,
        "k_flag": g.large,
        "searched_depth": g.searched_depth,
    } for g in gaps]
    flush("gaps.csv", content=_gaps_csv(gap_rows))

    profile_info = None
    q_profile = None
    dist_params = scenario.distortion_params()
    if dist_params is not None:
        word_text, r_max, search = dist_params
        letters = system.parse_word(word_text)
        q_profile = distortion_profile(system, letters, r_max, search, ball)
        profile_info = {
            "word": word_text,
            "rows": [[r, v] for r, v in q_profile.rows],
            "q_hat": list(q_profile.q_hat),
            "search_depth": search,
            "censored": q_profile.censored,
        }

    counter = dom.DomainCounter(system, gaps, tau_fix, scenario.max_iterations)
    curves_out: list[dict] = []
    scales_out: list[dict] = []

    for eps in scenario.epsilon_list:
        _log(f"[{scenario.name}] scale eps={eps:g}")
        grid = uniform_grid(scenario.grid_size(eps))
        profile = build_separation_profile(ball, grid, eps, scenario.n_max)
        curve_full = entropy_at_scale(profile)
        curve_omega = restricted_entropy(profile, approx)

        for curve in (curve_full, curve_omega):
            curves_out.append({
                "scope": curve.scope,
                "epsilon": curve.eps,
                "rows": [[n, s, c] for n, s, c in curve.rows],
                "slope": curve.slope,
                "window": list(curve.window),
                "restriction_size": curve.restriction_size,
            })
            verdicts.append({
                "name": f"eq1_ceiling[{curve.scope},eps={eps:g}]",
                "passed": all(s <= c for _, s, c in curve.rows),
                "detail": "s_lower <= (1/eps) #B(n) on every row",
            })
        growth_cap = math.log(max(2 * system.pair_count - 1, 1)) + 0.05
        verdicts.append({
            "name": f"entropy_ceiling[eps={eps:g}]",
            "passed": curve_full.slope <= growth_cap,
            "detail": f"tail slope {curve_full.slope:.4f} <= log(2p-1)+0.05 = {growth_cap:.4f}",
        })
        slope_diff = abs(curve_full.slope - curve_omega.slope)
        verdicts.append({
            "name": f"slope_consistency[eps={eps:g}]",
            "passed": slope_diff <= scenario.slope_tolerance,
            "detail": (f"|slope_full - slope_omega| = {slope_diff:.4f} "
                       f"<= {scenario.slope_tolerance:g} (finite-scale check)"),
        })

        # gap calculus at this scale
        eps_large = [i for i, g in enumerate(gaps) if g.arc.length >= eps]
        family = counter.family_for(eps, ball, scenario.effective_orbit_depth)
        family = counter.c_epsilon(family)
        base_contexts = [family.contexts[i] for i in family.base_indices]

        depths = scenario.lemma_depths
        sweeps = [
            dom.sweep_quasi_subadditivity(counter, base_contexts, ball,
                                          depths["quasi_subadditivity"]),
            dom.sweep_inverse_offset(counter, base_contexts, ball,
                                     depths["inverse_offset"]),
            dom.sweep_distortion_box(counter, base_contexts, ball,
                                     depths["distortion_box"],
                                     scenario.variation_samples),
            dom.sweep_orbit_ceiling(counter,
                                    counter.c_epsilon(counter.family_for(
                                        eps, ball, depths["orbit_ceiling"])),
                                    ball, depths["orbit_ceiling"],
                                    scenario.variation_samples),
        ]
        for rep in sweeps:
            rep.parameters["epsilon"] = eps
            lemma_reports.append(rep.as_dict())
            verdicts.append({
                "name": f"{rep.name}[eps={eps:g}]",
                "passed": rep.passed,
                "detail": f"{rep.instances_checked} instances, "
                          f"{len(rep.violations)} violations, {len(rep.skipped)} skipped",
            })

        # in-gap counting bounds on every large type2 gap
        counting_rows = []
        counting_ok = True
        for i in family.base_indices:
            gap = gaps[i]
            inside = np.nonzero(gap.arc.contains(profile.candidates))[0]
            if len(inside) == 0:
                continue
            for n in range(1, scenario.n_max + 1):
                measured = len(max_separated_greedy(profile, n, inside))
                bound = counter.in_gap_linear_bound(family, n)
                row = {"gap_left": gap.arc.left, "n": n, "measured": measured,
                       "linear_bound": bound.bound, "A": bound.A, "B": bound.B,
                       "pass_linear": measured <= bound.bound}
                if q_profile is not None and 2 * n <= q_profile.n_max:
                    b8 = family.k * (1 / eps + 1) * (2 * q_profile.q(2 * n) + 1)
                    row["staircase_bound"] = b8
                    row["pass_staircase"] = measured <= b8
                    counting_ok = counting_ok and row["pass_staircase"]
                counting_ok = counting_ok and row["pass_linear"]
                counting_rows.append(row)
        verdicts.append({
            "name": f"in_gap_counting[eps={eps:g}]",
            "passed": counting_ok,
            "detail": f"{len(counting_rows)} rows across {len(family.base_indices)} gaps",
        })

        # algebraic identity A n + B = k (1 + 1/eps) (4 n (1 + c) - 1)
        identity_ok = True
        if family.c_eps is not None and family.k > 0:
            for n in range(1, scenario.n_max + 1):
                b = counter.in_gap_linear_bound(family, n)
                rhs = family.k * (1 + 1 / eps) * (4 * n * (1 + family.c_eps) - 1)
                identity_ok = identity_ok and math.isclose(b.A * n + b.B, rhs,
                                                           rel_tol=1e-12)
        verdicts.append({
            "name": f"counting_identity[eps={eps:g}]",
            "passed": identity_ok,
            "detail": "A(eps) n + B(eps) matches the expanded product form",
        })

        # restriction inequality, both overhead forms
        ineq_reports = {}
        rep_a = check_restriction_inequality(
            curve_full, curve_omega,
            lambda n: dom.overhead_factor(family, n, "A"), form="A")
        ineq_reports["A"] = rep_a
        verdicts.append({
            "name": f"restriction_inequality_A[eps={eps:g}]",
            "passed": rep_a.all_pass,
            "detail": f"{len(rep_a.rows)} depths checked",
        })
        if q_profile is not None:
            try:
                rep_b = check_restriction_inequality(
                    curve_full, curve_omega,
                    lambda n: dom.overhead_factor(family, n, "B", q_profile),
                    form="B")
                ineq_reports["B"] = rep_b
                verdicts.append({
                    "name": f"restriction_inequality_B[eps={eps:g}]",
                    "passed": rep_b.all_pass,
                    "detail": f"{len(rep_b.rows)} depths checked",
                })
            except CensoredValueError as exc:
                verdicts.append({
                    "name": f"restriction_inequality_B[eps={eps:g}]",
                    "passed": False,
                    "detail": f"staircase censored: {exc}",
                })

        # transfer of the deepest separated set into the approximation
        S = max_separated_greedy(profile, scenario.n_max)
        transfer = dom.project_to_nonwandering(S, approx, gaps, ball, eps,
                                               scenario.n_max)
        transfer_info = {
            "points": transfer.points,
            "components_hit": transfer.components_hit,
            "certified": transfer.certified,
            "pairs": transfer.pair_records,
            "all_verified": transfer.all_verified,
        }
        verdicts.append({
            "name": f"core_transfer[eps={eps:g}]",
            "passed": transfer.all_verified,
            "detail": (f"t={transfer.components_hit}, "
                       f"certified l={transfer.certified}"),
        })

        scales_out.append({
            "epsilon": eps,
            "grid_size": int(scenario.grid_size(eps)),
            "k": family.k,
            "eps_large_gaps": [gaps[i].arc.left for i in eps_large],
            "type2_bases": [gaps[i].arc.left for i in family.base_indices],
            "family_contexts": len(family.contexts),
            "orbit_truncation_depth": family.truncation_depth,
            "c_eps": family.c_eps,
            "c_eps_per_generator": family.c_eps_per_generator,
            "counting_rows": counting_rows,
            "inequality": {name: dataclasses.asdict(rep)
                           for name, rep in ineq_reports.items()},
            "transfer": transfer_info,
        })

    report_data = {
        "scenario": scenario.echo(),
        "generators_echo": system.spec_echo(),
        "lipschitz": system.lipschitz,
        "pair_count": system.pair_count,
        "ball": ball_info,
        "omega": omega_info,
        "gaps": gap_rows,
        "distortion_profile": profile_info,
        "curves": curves_out,
        "scales": scales_out,
        "verdicts": verdicts,
    }
    flush("curves.csv", content=_curve_rows_csv(curves_out))
    flush("lemmas.json", obj=lemma_reports)
    flush("report.json", obj=report_data)
    return RunReport(report_data, lemma_reports)


def compare_within(report: dict, slope_tolerance: float = 0.1) -> dict:
    """Full vs restricted slope comparison inside one report."""
    pairs = []
    by_eps: dict[float, dict[str, dict]] = {}
    for c in report["curves"]:
        by_eps.setdefault(c["epsilon"], {})[c["scope"]] = c
    for eps, scopes in sorted(by_eps.items()):
        if "full" in scopes and "omega" in scopes:
            d = abs(scopes["full"]["slope"] - scopes["omega"]["slope"])
            pairs.append({"epsilon": eps, "slope_full": scopes["full"]["slope"],
                          "slope_omega": scopes["omega"]["slope"],
                          "difference": d,
                          "verdict": "consistent" if d <= slope_tolerance
                          else "inconsistent"})
    return {"pairs": pairs,
            "consistent": all(p["verdict"] == "consistent" for p in pairs),
            "note": "finite-scale consistency check, not a proof"}


def compare_reports(report_a: dict, report_b: dict,
                    slope_tolerance: float = 0.1) -> dict:
    """Match curves of two reports by (scope, epsilon) and compare slopes."""
    def key(c):
        return (c["scope"], c["epsilon"])

    curves_a = {key(c): c for c in report_a["curves"]}
    curves_b = {key(c): c for c in report_b["curves"]}
    shared = sorted(set(curves_a) & set(curves_b))
    if not shared:
        raise ConfigurationError("reports share no (scope, epsilon) curves")
    for k in shared:
        if [r[0] for r in curves_a[k]["rows"]] != [r[0] for r in curves_b[k]["rows"]]:
            raise ConfigurationError(f"curve {k} has mismatched depth ranges")
    pairs = []
    for k in shared:
        d = abs(curves_a[k]["slope"] - curves_b[k]["slope"])
        pairs.append({"scope": k[0], "epsilon": k[1],
                      "slope_a": curves_a[k]["slope"],
                      "slope_b": curves_b[k]["slope"],
                      "difference": d,
                      "verdict": "consistent" if d <= slope_tolerance
                      else "inconsistent"})
    return {"pairs": pairs,
            "consistent": all(p["verdict"] == "consistent" for p in pairs),
            "note": "finite-scale consistency check, not a proof"}
