"""Separated sets, entropy-at-scale curves, and the restriction inequality.

Two points are (n, eps)-separated when some element of the word ball B(n)
maps them at circle distance >= eps. The exact maximal separated cardinality
s(n, eps) is a clique number, so it is bracketed instead of computed: a
greedy sweep over a uniform candidate grid gives a lower bound, and the
counting identity s(n, eps) <= (1/eps) #B(n) gives the ceiling (each ball
element can separate at most 1/eps adjacent pairs because the image
intervals it certifies have disjoint interiors).

The pairwise separation structure is built once per scale by streaming the
ball in canonical order and snapshotting after each radius, so curves, gap
restrictions, and witness lookups all come from one pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyRestrictionError,
    ExactOracleCapError,
    ValidationError,
)
from .geometry import circle_dist, forward_gap, uniform_grid
from .words import Ball, BallElement

__all__ = [
    "SeparationProfile",
    "build_separation_profile",
    "SeparatedSet",
    "is_separated",
    "max_separated_greedy",
    "max_separated_exact",
    "EntropyCurve",
    "entropy_at_scale",
    "restricted_entropy",
    "InequalityReport",
    "check_restriction_inequality",
    "tail_window",
]


@dataclass
class SeparationProfile:
    """Pairwise separation data for one scale eps over a fixed candidate grid.

    ``sep_at[n]`` is the boolean matrix "separated within B(n)";
    ``witness_ord[i, j]`` is the canonical-order index of the first ball
    element separating the pair (-1 when none up to the enumerated depth).
    """

    candidates: np.ndarray
    eps: float
    n_max: int
    ball: Ball
    sep_at: list[np.ndarray]
    witness_ord: np.ndarray
    grid_spacing: float

    def witness(self, i: int, j: int) -> BallElement | None:
        o = int(self.witness_ord[i, j])
        return None if o < 0 else self.ball.elements[o]


def build_separation_profile(ball: Ball, candidates: np.ndarray, eps: float,
                             n_max: int) -> SeparationProfile:
    """Stream the ball once, recording pair separation and first witnesses."""
    if not (0.0 < eps < 0.5):
        raise ValidationError("eps must lie in (0, 1/2)")
    if n_max > ball.depth:
        raise ValidationError(f"profile depth {n_max} exceeds ball depth {ball.depth}")
    cand = np.asarray(candidates, dtype=float)
    if cand.ndim != 1 or len(cand) < 1:
        raise ValidationError("need a nonempty 1-d candidate grid")
    if np.any(np.diff(cand) <= 0):
        raise ValidationError("candidates must be sorted and distinct")
    c = len(cand)
    spacing = float(np.max(np.diff(np.concatenate([cand, [cand[0] + 1.0]]))))

    sep = np.zeros((c, c), dtype=bool)
    witness = np.full((c, c), -1, dtype=np.int64)
    snapshots: list[np.ndarray] = []

    diff = np.empty((c, c))
    mask = np.empty((c, c), dtype=bool)
    fresh = np.empty((c, c), dtype=bool)

    # candidate images propagate parent word -> child word, one primitive
    # application per element, so the stream is linear in the ball size
    maps = ball.system.maps
    prev_images: dict[tuple[int, ...], np.ndarray] = {}
    pos = 0
    for depth in range(0, n_max + 1):
        upto = ball.size_at(depth)
        cur_images: dict[tuple[int, ...], np.ndarray] = {}
        while pos < upto:
            el = ball.elements[pos]
            if el.word:
                v = maps[el.word[-1]](prev_images[el.word[:-1]])
            else:
                v = cand.copy()
            cur_images[el.word] = v
            pos += 1
            # cheap spread bound: if all images fit in an arc shorter than
            # eps, no pair can be separated by this element
            vs = np.sort(v)
            gaps = np.diff(vs)
            largest_gap = max(float(gaps.max(initial=0.0)), float(1.0 - vs[-1] + vs[0]))
            if 1.0 - largest_gap < eps:
                continue
            np.subtract(v[:, None], v[None, :], out=diff)
            np.abs(diff, out=diff)
            np.minimum(diff, 1.0 - diff, out=diff)
            np.greater_equal(diff, eps, out=mask)
            np.logical_and(mask, ~sep, out=fresh)
            if fresh.any():
                witness[fresh] = pos - 1
            np.logical_or(sep, mask, out=sep)
        prev_images = cur_images
        snapshots.append(sep.copy())

    return SeparationProfile(candidates=cand, eps=eps, n_max=n_max, ball=ball,
                             sep_at=snapshots, witness_ord=witness,
                             grid_spacing=spacing)


@dataclass
class SeparatedSet:
    """A pairwise separated point set with per-adjacent-pair witnesses.

    ``witnesses[k]`` separates points[k] and points[(k+1) % m] (cyclic).
    ``mode`` records whether the set is the greedy lower bound or the exact
    branch-and-bound maximum.
    """

    points: np.ndarray
    indices: list[int]
    witnesses: list[BallElement | None]
    mode: str
    eps: float
    n: int
    grid_too_coarse: bool = False

    def __len__(self) -> int:
        return len(self.indices)


def is_separated(system, x: float, y: float, elements, eps: float):
    """First ball element (canonical order) mapping x, y at distance >= eps."""
    for el in elements:
        if circle_dist(system.apply_word(el.word, x), system.apply_word(el.word, y)) >= eps:
            return True, el
    return False, None


def _adjacent_witnesses(profile: SeparationProfile, chosen: list[int]) -> list:
    m = len(chosen)
    if m < 2:
        return []
    return [profile.witness(chosen[k], chosen[(k + 1) % m]) for k in range(m)]


def max_separated_greedy(profile: SeparationProfile, n: int,
                         subset: np.ndarray | None = None) -> SeparatedSet:
    """Single sweep in circle order from t = 0, admitting when separated
    from every already admitted point. Maximal under inclusion and
    deterministic given the grid."""
    mat = profile.sep_at[n]
    order = range(len(profile.candidates)) if subset is None else list(subset)
    admitted: list[int] = []
    for cidx in order:
        if all(mat[cidx, a] for a in admitted):
            admitted.append(cidx)
    return SeparatedSet(
        points=profile.candidates[admitted],
        indices=admitted,
        witnesses=_adjacent_witnesses(profile, admitted),
        mode="greedy-lower",
        eps=profile.eps,
        n=n,
        grid_too_coarse=profile.grid_spacing > profile.eps,
    )


def _max_clique(adj: np.ndarray) -> list[int]:
    """Exact maximum clique by branch and bound, for desk-scale instances."""
    n = adj.shape[0]
    order = list(np.argsort(-adj.sum(axis=1), kind="stable"))
    best: list[int] = []

    def extend(current: list[int], cands: list[int]) -> None:
        nonlocal best
        if len(current) > len(best):
            best = current.copy()
        for k, v in enumerate(cands):
            if len(current) + len(cands) - k <= len(best):
                return
            nxt = [w for w in cands[k + 1:] if adj[v, w]]
            current.append(v)
            extend(current, nxt)
            current.pop()

    extend([], order)
    return sorted(best)


def max_separated_exact(profile: SeparationProfile, n: int,
                        subset: np.ndarray | None = None,
                        cap: int = 24) -> SeparatedSet:
    """Exact maximum-cardinality separated subset (clique in the separation
    graph). Refuses instances above ``cap`` candidates; use greedy there."""
    idx = list(range(len(profile.candidates))) if subset is None else list(subset)
    if len(idx) > cap:
        raise ExactOracleCapError(
            f"{len(idx)} candidates exceed the exact-search cap {cap}; use max_separated_greedy"
        )
    sub = profile.sep_at[n][np.ix_(idx, idx)]
    clique = _max_clique(sub)
    chosen = [idx[k] for k in clique]
    return SeparatedSet(
        points=profile.candidates[chosen],
        indices=chosen,
        witnesses=_adjacent_witnesses(profile, chosen),
        mode="exhaustive-exact",
        eps=profile.eps,
        n=n,
        grid_too_coarse=profile.grid_spacing > profile.eps,
    )


def tail_window(n_max: int) -> tuple[int, int]:
    return (math.ceil(n_max / 2), n_max)


def _ols_slope(ns: list[int], logs: list[float]) -> float:
    x = np.asarray(ns, dtype=float)
    y = np.asarray(logs, dtype=float)
    if len(x) < 2:
        return 0.0
    xm, ym = x.mean(), y.mean()
    denom = float(((x - xm) ** 2).sum())
    return float(((x - xm) * (y - ym)).sum() / denom)


@dataclass
class EntropyCurve:
    """Rows (n, s_lower, ceiling) plus the tail-window least-squares slope."""

    eps: float
    rows: list[tuple[int, int, float]]
    slope: float
    window: tuple[int, int]
    scope: str = "full"
    restriction_size: int | None = None

    def s_lower(self, n: int) -> int:
        for row in self.rows:
            if row[0] == n:
                return row[1]
        raise KeyError(n)


def _curve_from_counts(profile: SeparationProfile, counts: list[int], scope: str,
                       restriction_size: int | None = None) -> EntropyCurve:
    rows = []
    for n in range(profile.n_max + 1):
        ceiling = (1.0 / profile.eps) * profile.ball.size_at(n)
        rows.append((n, counts[n], ceiling))
    lo, hi = tail_window(profile.n_max)
    ns = [n for n, _, _ in rows if lo <= n <= hi]
    logs = [math.log(s) for n, s, _ in rows if lo <= n <= hi]
    return EntropyCurve(eps=profile.eps, rows=rows, slope=_ols_slope(ns, logs),
                        window=(lo, hi), scope=scope, restriction_size=restriction_size)


def entropy_at_scale(profile: SeparationProfile) -> EntropyCurve:
    """Greedy lower-bound curve over the full candidate grid.

    Requires grid spacing <= eps/4 so the grid resolves the scale.
    """
    if profile.grid_spacing > profile.eps / 4 + 1e-12:
        raise ValidationError(
            f"grid spacing {profile.grid_spacing:g} exceeds eps/4 = {profile.eps / 4:g}"
        )
    counts = [len(max_separated_greedy(profile, n)) for n in range(profile.n_max + 1)]
    return _curve_from_counts(profile, counts, scope="full")


def restricted_entropy(profile: SeparationProfile, approx) -> EntropyCurve:
    """Greedy curve with candidates restricted to the approximation arcs."""
    mask = approx.contains(profile.candidates)
    subset = np.nonzero(mask)[0]
    if len(subset) == 0:
        raise EmptyRestrictionError("no candidate grid point lies in the restriction")
    counts = [len(max_separated_greedy(profile, n, subset)) for n in range(profile.n_max + 1)]
    return _curve_from_counts(profile, counts, scope="omega",
                              restriction_size=int(len(subset)))


@dataclass
class InequalityReport:
    """Per-n verdicts of s_full(n) <= p(n) s_restricted(n) + p(n).

    Both sides are greedy lower bounds, so this is a consistency check of
    the counting chain, not a proof; the caveat travels with the report.
    """

    eps: float
    form: str
    rows: list[dict]
    all_pass: bool
    caveat: str = (
        "both sides are lower bounds from the same grid; the check is a "
        "finite-scale consistency test, not a proof"
    )


def check_restriction_inequality(curve_full: EntropyCurve, curve_omega: EntropyCurve,
                                 p_fn, form: str, n_min: int = 1) -> InequalityReport:
    from .errors import ConfigurationError

    if curve_full.eps != curve_omega.eps:
        raise ConfigurationError("curves computed at different scales")
    if [r[0] for r in curve_full.rows] != [r[0] for r in curve_omega.rows]:
        raise ConfigurationError("curves computed over different depth ranges")
    rows = []
    ok = True
    for (n, s_full, _), (_, s_om, _) in zip(curve_full.rows, curve_omega.rows):
        if n < n_min:
            continue
        p = float(p_fn(n))
        passed = s_full <= p * s_om + p
        ok = ok and passed
        rows.append({"n": n, "s_full": s_full, "s_omega": s_om, "p": p, "pass": passed})
    return InequalityReport(eps=curve_full.eps, form=form, rows=rows, all_pass=ok)
