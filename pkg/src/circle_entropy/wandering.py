"""Grid approximation of the non-wandering set and gap classification.

A point x is wandering when some neighborhood U satisfies f(U) and U
disjoint for every nontrivial group element f. That is verifiable at finite
depth, so the approximation works from outside: a grid point is certified
wandering when every non-identity element of B(N) moves its open delta-ball
off itself (interval images computed from monotonicity), and the reported
set is the complement of the certified points, coalesced into closed arcs.
The result is a superset of the true non-wandering set up to delta-boundary
effects; deepening N at fixed delta only shrinks it, because wandering
certificates accumulate.

Gap components (complementary open arcs) carry a stabilizer classification:
"type2" when a searched ball element fixes the gap setwise and translates
its interior, "type1" when no fixer was found within the searched depth.
Type1 is always depth-relative; no absolute triviality claim is made.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InconsistentGapError, ValidationError
from .geometry import Arc, circle_dist, forward_gap, reduce_angle, signed_offset
from .words import Ball, BallElement

__all__ = [
    "NonWanderingApprox",
    "approximate_nonwandering",
    "GapComponent",
    "gap_components",
    "classify_component",
    "classify_all",
]


@dataclass(frozen=True)
class NonWanderingApprox:
    """A finite union of closed arcs covering the non-wandering set.

    ``arcs`` are pairwise disjoint and sorted by left endpoint; when the
    certification left nothing wandering the approximation is the full
    circle and ``arcs`` is empty with ``full_circle`` set.
    """

    arcs: tuple[Arc, ...]
    full_circle: bool
    depth: int
    resolution: float
    ball_ref: str

    @property
    def total_length(self) -> float:
        return 1.0 if self.full_circle else sum(a.length for a in self.arcs)

    def contains(self, t):
        if self.full_circle:
            return np.ones(np.shape(t), dtype=bool) if np.ndim(t) else True
        if np.ndim(t) == 0:
            return any(a.contains(t, closed=True) for a in self.arcs)
        out = np.zeros(np.shape(t), dtype=bool)
        for a in self.arcs:
            out |= a.contains(t, closed=True)
        return out


def _runs_cyclic(mask: np.ndarray) -> list[tuple[int, int]]:
    """Maximal runs of True in a cyclic boolean array, as (start, count)."""
    m = len(mask)
    if mask.all():
        return [(0, m)]
    if not mask.any():
        return []
    # rotate so position 0 is False, then split linearly
    shift = int(np.argmin(mask))
    rotated = np.roll(mask, -shift)
    runs = []
    start = None
    for i, v in enumerate(rotated):
        if v and start is None:
            start = i
        elif not v and start is not None:
            runs.append(((start + shift) % m, i - start))
            start = None
    if start is not None:
        runs.append(((start + shift) % m, m - start))
    return sorted(runs)


def approximate_nonwandering(ball: Ball, depth: int, delta: float) -> NonWanderingApprox:
    """Certify wandering grid points against B(depth) and coalesce the rest.

    The grid has spacing 1/M with M = round(1/delta); each uncertified grid
    point contributes its closed half-cell [x - delta/2, x + delta/2].
    """
    if depth < 1:
        raise ValidationError("certification depth must be at least 1")
    if not (0.0 < delta < 0.25):
        raise ValidationError("resolution must lie in (0, 1/4)")
    if depth > ball.depth:
        raise ValidationError(f"certification depth {depth} exceeds ball depth {ball.depth}")
    m = round(1.0 / delta)
    eff = 1.0 / m
    grid = np.arange(m, dtype=float) * eff
    u0 = reduce_angle(grid - eff)  # left endpoints of the delta-balls

    certified = np.ones(m, dtype=bool)
    system = ball.system
    for el in ball.elements_up_to(depth)[1:]:
        if not certified.any():
            break
        imgs = system.apply_word(el.word, grid)
        v0 = np.roll(imgs, 1)       # f(x_{j-1})
        v1 = np.roll(imgs, -1)      # f(x_{j+1})
        img_len = reduce_angle(v1 - v0)
        # open arcs ]u0, u0+2eff[ and ]v0, v0+img_len[ intersect iff one
        # starts strictly inside the other
        overlap = (reduce_angle(v0 - u0) < 2 * eff) | (reduce_angle(u0 - v0) < img_len)
        certified &= ~overlap

    noncert = ~certified
    if noncert.all():
        return NonWanderingApprox(arcs=(), full_circle=True, depth=depth,
                                  resolution=eff, ball_ref=ball.ref())
    runs = _runs_cyclic(noncert)
    arcs = tuple(
        Arc(left=reduce_angle(grid[start] - eff / 2), length=count * eff)
        for start, count in runs
    )
    return NonWanderingApprox(arcs=arcs, full_circle=False, depth=depth,
                              resolution=eff, ball_ref=ball.ref())


@dataclass(frozen=True)
class GapComponent:
    """A connected component of the complement of the approximation.

    ``kind`` is "undetermined" until classified; after classification it is
    "type2" (stabilizer found, oriented to move the gap interior forward)
    or "type1" (no fixer within the searched ball, recorded in
    ``searched_depth``). ``large`` flags length >= eps for the scale the
    component list was built at.
    """

    arc: Arc
    kind: str = "undetermined"
    stabilizer: BallElement | None = None
    searched_depth: int | None = None
    large: bool = False

    @property
    def midpoint(self) -> float:
        return self.arc.midpoint


def gap_components(approx: NonWanderingApprox, eps: float) -> list[GapComponent]:
    """All complementary arcs, flagged large when their length is >= eps."""
    if approx.full_circle:
        return []
    if not approx.arcs:
        raise ValidationError("approximation is empty; complement is the whole circle")
    gaps = []
    arcs = approx.arcs
    for i, arc in enumerate(arcs):
        nxt = arcs[(i + 1) % len(arcs)]
        length = forward_gap(arc.right, nxt.left)
        if length <= 0.0:
            continue
        gap_arc = Arc(left=arc.right, length=length)
        gaps.append(GapComponent(arc=gap_arc, large=gap_arc.length >= eps))
    return sorted(gaps, key=lambda g: g.arc.left)


def _oriented_letters(system, el: BallElement, gap: GapComponent,
                      samples: int = 33, fix_tol: float = 1e-9):
    """Displacement signs of el on the gap interior; orient to move forward.

    Returns the (possibly inverted) letters, or raises when the element has
    an interior fixed point or acts as the identity on the gap, both of
    which contradict the gap being wandering.
    """
    xs = gap.arc.interior_sample(samples)
    disp = signed_offset(system.apply_word(el.word, xs), xs)
    pos = np.any(disp > fix_tol)
    neg = np.any(disp < -fix_tol)
    if pos and neg:
        raise InconsistentGapError(
            f"gap at {gap.arc.left:.6f}: fixer {system.word_label(el.word)!r} "
            "changes displacement sign inside the gap (interior fixed point)"
        )
    if not pos and not neg:
        raise InconsistentGapError(
            f"gap at {gap.arc.left:.6f}: fixer {system.word_label(el.word)!r} "
            "acts as the identity on the gap interior"
        )
    return el.word if pos else system.invert_letters(el.word)


def classify_all(gaps: list[GapComponent], ball: Ball, depth: int,
                 tau_fix: float) -> list[GapComponent]:
    """Classify every gap against B(depth) in one vectorized pass.

    An element fixes a gap setwise when both endpoint images return within
    tolerance; the tolerance is tau_fix capped at a quarter of the gap
    length so the claim stays meaningful for short gaps. The least-norm
    fixer (canonical order) becomes the stabilizer, inverted if needed so
    it moves the gap interior forward.
    """
    if not gaps:
        return []
    system = ball.system
    lefts = np.array([g.arc.left for g in gaps])
    rights = np.array([g.arc.right for g in gaps])
    tols = np.minimum(tau_fix, np.array([g.arc.length for g in gaps]) / 4.0)
    endpoints = np.concatenate([lefts, rights])
    n_gaps = len(gaps)

    found: list[BallElement | None] = [None] * n_gaps
    remaining = n_gaps
    for el in ball.elements_up_to(depth)[1:]:
        imgs = system.apply_word(el.word, endpoints)
        hit = (circle_dist(imgs[:n_gaps], lefts) <= tols) & \
              (circle_dist(imgs[n_gaps:], rights) <= tols)
        for i in np.nonzero(hit)[0]:
            if found[i] is None:
                found[i] = el
                remaining -= 1
        if remaining == 0:
            break

    out = []
    for gap, el in zip(gaps, found):
        if el is None:
            out.append(replace(gap, kind="type1", stabilizer=None, searched_depth=depth))
        else:
            letters = _oriented_letters(system, el, gap)
            stab = BallElement(word=letters, norm=el.norm,
                               fingerprint=system.apply_word(letters, ball.spec.probe_points()))
            out.append(replace(gap, kind="type2", stabilizer=stab, searched_depth=depth))
    return out


def classify_component(gap: GapComponent, ball: Ball, depth: int,
                       tau_fix: float) -> GapComponent:
    """Classification of a single gap; see classify_all."""
    return classify_all([gap], ball, depth, tau_fix)[0]
