"""Fundamental-domain counting on stabilized gaps and the bounds built on it.

For a gap I with infinite cyclic stabilizer generated by h (oriented so
h moves the gap interior forward), the intervals [h^r(x), h^(r+1)(x)[ tile I.
Given a group element f that carries I onto another gap J, the displacement
count ell_I(f) is |r| for the unique integer r with

    h^r(y) <= p_I < h^(r+1)(y),      y = f^(-1)(p_J),

where p_I, p_J are the gap midpoints. This counts fundamental domains of h
between the pulled-back midpoint of the image gap and the midpoint of the
source gap; conjugating by f shows it equals the same count for the dynamics
of f h f^(-1) on J between p_J and f(p_I). The count is quasi-subadditive
under composition (up to +1) and almost symmetric under inversion (up to 1),
and for differentiable actions it is bounded in terms of the total variation
of log f', which is what makes the family supremum finite.

Image gaps are located by midpoint pullback: J is the gap whose midpoint
pulls back under f into I. Matching image endpoints against gap endpoints is
not robust here, because approximate endpoints sit a resolution-fuzz inside
the true gap and stabilizer-like elements translate that fuzz arbitrarily
far along the gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CensoredValueError,
    EscapedGapError,
    GapImageNotFoundError,
    UnboundedDomainCountError,
    ValidationError,
)
from .geometry import Arc, circle_dist, forward_gap, reduce_angle
from .maps import circle_log_derivative_variation, log_derivative_variation
from .separation import SeparatedSet
from .wandering import GapComponent, NonWanderingApprox
from .words import Ball, BallElement, DistortionProfile, GeneratingSystem, WordMap

__all__ = [
    "StabilizedGap",
    "DomainCount",
    "DomainCounter",
    "GapFamily",
    "FamilyCount",
    "BoxResult",
    "CeilingResult",
    "LinearBound",
    "overhead_factor",
    "CheckRecord",
    "LemmaReport",
    "sweep_quasi_subadditivity",
    "sweep_inverse_offset",
    "sweep_distortion_box",
    "sweep_orbit_ceiling",
    "propagation_prefix",
    "CoreTransfer",
    "project_to_nonwandering",
]


@dataclass(frozen=True)
class StabilizedGap:
    """A gap with an oriented stabilizer word; the ell evaluation context.

    Positions inside the gap are compared through ``rel``: an unwrapped
    coordinate anchored half the complement before the left endpoint, so
    the gap interior maps to (0, length) and both margins stay monotone.
    """

    arc: Arc
    h_letters: tuple[int, ...]
    system: GeneratingSystem
    gap_index: int
    base_index: int

    @property
    def length(self) -> float:
        return self.arc.length

    @property
    def p(self) -> float:
        return self.arc.midpoint

    def rel(self, t: float) -> float:
        m0 = (1.0 - self.arc.length) / 2.0
        return forward_gap(reduce_angle(self.arc.left - m0), t) - m0

    def apply_h(self, t: float) -> float:
        return self.system.apply_word(self.h_letters, t)

    def apply_h_inv(self, t: float) -> float:
        return self.system.apply_word(self.system.invert_letters(self.h_letters), t)


@dataclass(frozen=True)
class DomainCount:
    """Signed fundamental-domain offset r and the count ell = |r|."""

    r: int
    ell: int
    image_gap: int
    pullback: float
    iterations: int


@dataclass(frozen=True)
class GapFamily:
    """Evaluation contexts for the large gaps and their ball orbit.

    ``k`` counts every gap of length >= eps regardless of classification;
    contexts exist only for the type2 ones and for located ball images of
    them (stabilizers transported by conjugation). The orbit is truncated
    at ``truncation_depth``; the supremum over the full orbit is certified
    only through the variation ceiling.
    """

    eps: float
    k: int
    truncation_depth: int
    contexts: dict[int, StabilizedGap]
    base_indices: tuple[int, ...]
    c_eps: float | None = None
    c_eps_per_generator: dict[str, int] | None = None


@dataclass(frozen=True)
class FamilyCount:
    value: int
    per_gap: dict[int, int]
    skipped: tuple[tuple[int, str], ...]


@dataclass(frozen=True)
class BoxResult:
    """Distortion box [c, d] for a variation budget V, and the containment check."""

    c_rel: float
    d_rel: float
    pullback_rel: float
    contained: bool
    slack: float
    box_domains: int
    applicable: bool = True

    @property
    def L(self) -> int:
        return self.box_domains + 1


@dataclass(frozen=True)
class CeilingResult:
    total_generator_variation: float
    word_variation: float
    per_base: dict[int, int]
    ceiling: int


@dataclass(frozen=True)
class LinearBound:
    A: float
    B: float
    n: int
    bound: float


@dataclass(frozen=True)
class CheckRecord:
    ok: bool
    data: dict


@dataclass
class LemmaReport:
    name: str
    instances_checked: int
    violations: list[dict]
    skipped: list[dict]
    parameters: dict

    @property
    def passed(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "instances_checked": self.instances_checked,
            "violations": self.violations,
            "skipped": self.skipped,
            "parameters": self.parameters,
        }


class DomainCounter:
    """Shared machinery: gap table, pullback cache, and ell evaluation."""

    def __init__(self, system: GeneratingSystem, gaps: list[GapComponent],
                 tau_fix: float, max_iter: int = 1_000_000,
                 crossing_tol: float = 1e-12):
        self.system = system
        self.gaps = list(gaps)
        self.tau_fix = tau_fix
        self.max_iter = max_iter
        self.crossing_tol = crossing_tol
        self._midpoints = np.array([g.arc.left + g.arc.length / 2.0 for g in gaps]) % 1.0
        self._pullbacks: dict[tuple[int, ...], np.ndarray] = {}

    # -- contexts ------------------------------------------------------

    def context_for(self, gap_index: int, base_index: int | None = None) -> StabilizedGap:
        gap = self.gaps[gap_index]
        if gap.kind != "type2" or gap.stabilizer is None:
            raise ValidationError(
                f"gap at {gap.arc.left:.6f} is {gap.kind}; ell needs a type2 gap"
            )
        return StabilizedGap(arc=gap.arc, h_letters=gap.stabilizer.word,
                             system=self.system, gap_index=gap_index,
                             base_index=gap_index if base_index is None else base_index)

    def conjugate_context(self, ctx: StabilizedGap, f_letters, image_gap: int) -> StabilizedGap:
        """Context for f(I) with stabilizer f h f^{-1}, orientation verified."""
        f = tuple(f_letters)
        letters = self.system.invert_letters(f) + tuple(ctx.h_letters) + f
        gap = self.gaps[image_gap]
        probe = reduce_angle(gap.arc.left + gap.arc.length / 2.0)
        out = StabilizedGap(arc=gap.arc, h_letters=letters, system=self.system,
                            gap_index=image_gap, base_index=ctx.base_index)
        if out.rel(self.system.apply_word(letters, probe)) < out.rel(probe):
            out = StabilizedGap(arc=gap.arc,
                                h_letters=self.system.invert_letters(letters),
                                system=self.system, gap_index=image_gap,
                                base_index=ctx.base_index)
        return out

    # -- image gap location --------------------------------------------

    def _pullback_vector(self, f_letters: tuple[int, ...]) -> np.ndarray:
        cached = self._pullbacks.get(f_letters)
        if cached is None:
            inv = self.system.invert_letters(f_letters)
            cached = self.system.apply_word(inv, self._midpoints)
            self._pullbacks[f_letters] = cached
        return cached

    def locate_image_gap(self, ctx: StabilizedGap, f_letters) -> tuple[int, float]:
        """Index of the gap J with f^(-1)(p_J) inside I, and that pullback."""
        f = tuple(f_letters)
        ys = self._pullback_vector(f)
        margin = self.tau_fix
        best = None
        for j in range(len(self.gaps)):
            rel = ctx.rel(float(ys[j]))
            if -margin <= rel <= ctx.length + margin:
                depth = min(rel, ctx.length - rel)
                if best is None or depth > best[0]:
                    best = (depth, j, float(ys[j]))
        if best is None:
            raise GapImageNotFoundError(
                f"no gap midpoint pulls back into the gap at {ctx.arc.left:.6f} "
                f"under {self.system.word_label(f)!r}"
            )
        return best[1], best[2]

    # -- the count ------------------------------------------------------

    def count(self, ctx: StabilizedGap, f_letters) -> DomainCount:
        image_gap, y = self.locate_image_gap(ctx, f_letters)
        r, iters = self._offset(ctx, y)
        return DomainCount(r=r, ell=abs(r), image_gap=image_gap,
                           pullback=y, iterations=iters)

    # Orbit segments near the gap endpoints are computed with ~1e-15 absolute
    # error per step (the angle chart loses relative precision there), and
    # the forward dynamics amplifies earlier errors by its derivative. The
    # crossing comparison therefore uses a running first-order error bound,
    # err <- err * h'(z) + injection, so that boundary cases (the pullback
    # landing exactly on an iterate of the midpoint) resolve consistently.
    _ERR_INJECTION = 1e-14

    def _offset(self, ctx: StabilizedGap, y: float) -> tuple[int, int]:
        esc = ctx.length + self.tau_fix
        rel_p = ctx.rel(ctx.p)
        h_inv = self.system.invert_letters(ctx.h_letters)
        z, rz = y, ctx.rel(y)
        err = self._ERR_INJECTION
        iters = 0
        if rz <= rel_p + self.crossing_tol + 10.0 * err:
            r = 0
            while True:
                d = self.system.word_derivative(ctx.h_letters, z)
                z2 = ctx.apply_h(z)
                rz2 = ctx.rel(z2)
                err = err * d + self._ERR_INJECTION
                if rz2 <= rel_p + self.crossing_tol + 10.0 * err:
                    z, rz = z2, rz2
                    r += 1
                    iters += 1
                    if rz < -self.tau_fix or rz > esc:
                        raise EscapedGapError(
                            f"stabilizer orbit left the gap at {ctx.arc.left:.6f}"
                        )
                    if iters > self.max_iter:
                        raise UnboundedDomainCountError(
                            f"no crossing after {self.max_iter} forward steps; "
                            "orbit stalls near the gap boundary or ell is genuinely huge"
                        )
                else:
                    return r, iters
        r = 0
        while rz > rel_p + self.crossing_tol + 10.0 * err:
            d = self.system.word_derivative(h_inv, z)
            z = self.system.apply_word(h_inv, z)
            rz = ctx.rel(z)
            err = err * d + self._ERR_INJECTION
            r -= 1
            iters += 1
            if rz < -self.tau_fix or rz > esc:
                raise EscapedGapError(
                    f"stabilizer orbit left the gap at {ctx.arc.left:.6f}"
                )
            if iters > self.max_iter:
                raise UnboundedDomainCountError(
                    f"no crossing after {self.max_iter} backward steps; "
                    "orbit stalls near the gap boundary or ell is genuinely huge"
                )
        return r, iters

    # -- families --------------------------------------------------------

    def family_for(self, eps: float, ball: Ball, truncation_depth: int) -> GapFamily:
        """Contexts for the large type2 gaps and their located ball images."""
        large = [i for i, g in enumerate(self.gaps) if g.arc.length >= eps]
        bases = [i for i in large if self.gaps[i].kind == "type2"]
        contexts: dict[int, StabilizedGap] = {}
        for i in bases:
            contexts[i] = self.context_for(i)
        for el in ball.elements_up_to(truncation_depth):
            if not el.word:
                continue
            for i in bases:
                ctx = contexts[i]
                try:
                    j, _ = self.locate_image_gap(ctx, el.word)
                except GapImageNotFoundError:
                    continue
                if j not in contexts:
                    contexts[j] = self.conjugate_context(ctx, el.word, j)
        return GapFamily(eps=eps, k=len(large), truncation_depth=truncation_depth,
                         contexts=contexts, base_indices=tuple(bases))

    def family_count(self, family: GapFamily, f_letters) -> FamilyCount:
        per_gap: dict[int, int] = {}
        skipped: list[tuple[int, str]] = []
        for j, ctx in family.contexts.items():
            try:
                per_gap[j] = self.count(ctx, f_letters).ell
            except (GapImageNotFoundError, EscapedGapError) as exc:
                skipped.append((j, type(exc).__name__))
            except UnboundedDomainCountError as exc:
                skipped.append((j, type(exc).__name__))
        return FamilyCount(value=max(per_gap.values(), default=0),
                           per_gap=per_gap, skipped=tuple(skipped))

    def c_epsilon(self, family: GapFamily) -> GapFamily:
        """Fill in c_eps = max over generators of the family count."""
        per_gen: dict[str, int] = {}
        for i, name in enumerate(self.system.names):
            per_gen[name] = self.family_count(family, (i,)).value
        c = max(per_gen.values(), default=0)
        return GapFamily(eps=family.eps, k=family.k,
                         truncation_depth=family.truncation_depth,
                         contexts=family.contexts, base_indices=family.base_indices,
                         c_eps=float(c), c_eps_per_generator=per_gen)

    # -- distortion control ----------------------------------------------

    def box_domain_count(self, ctx: StabilizedGap, c_rel: float, d_rel: float) -> int:
        """Fundamental domains of h met while crossing [c, d] inside the gap."""
        if c_rel >= d_rel:
            return 0
        m0 = (1.0 - ctx.length) / 2.0
        z = reduce_angle(reduce_angle(ctx.arc.left - m0) + m0 + c_rel)
        count = 0
        rz = c_rel
        while rz < d_rel:
            z = ctx.apply_h(z)
            rz = ctx.rel(z)
            count += 1
            if count > self.max_iter:
                raise UnboundedDomainCountError(
                    f"box crossing needs more than {self.max_iter} domains"
                )
        return count

    def distortion_box(self, ctx: StabilizedGap, g_letters, variation: float,
                       slack: float = 1e-6) -> BoxResult:
        """Box [a + |I|/(2 e^V), b - |I|/(2 e^V)] and the pullback containment.

        The mean-value argument places g^(-1)(p_{g(I)}) inside the box
        whenever V dominates the true variation of log g' on the gap; the
        reported L = (domains in the box) + 1 is the effective per-gap
        bound on the count for any element with that variation budget.
        """
        V = float(variation)
        margin = ctx.length / (2.0 * math.exp(V))
        c_rel = margin
        d_rel = ctx.length - margin
        if d_rel < c_rel:  # V = 0 degenerates to the single point p_I
            c_rel = d_rel = ctx.length / 2.0
        _, y = self.locate_image_gap(ctx, g_letters)
        y_rel = ctx.rel(y)
        need = margin * (1.0 - slack)
        contained = (y_rel >= need) and (ctx.length - y_rel >= need)
        room = min(y_rel, ctx.length - y_rel) - need
        return BoxResult(c_rel=c_rel, d_rel=d_rel, pullback_rel=y_rel,
                         contained=bool(contained), slack=float(room),
                         box_domains=self.box_domain_count(ctx, c_rel, d_rel))

    def orbit_ceiling(self, family: GapFamily, f_letters,
                      variation_samples: int = 4096) -> CeilingResult:
        """Variation ceiling L(W) + L(W+V) + 2 per base gap, W summed over
        the generators' full-circle variations (an upper bound for sums over
        disjoint interval chains)."""
        W = 0.0
        for m in self.system.maps:
            W += circle_log_derivative_variation(m, variation_samples).value
        V = 0.0
        if f_letters:
            V = circle_log_derivative_variation(
                WordMap(self.system, f_letters), variation_samples
            ).value
        per_base: dict[int, int] = {}
        for i in family.base_indices:
            ctx = family.contexts[i]
            m_w = ctx.length / (2.0 * math.exp(W))
            m_wv = ctx.length / (2.0 * math.exp(W + V))
            L_w = self.box_domain_count(ctx, m_w, ctx.length - m_w) + 1
            L_wv = self.box_domain_count(ctx, m_wv, ctx.length - m_wv) + 1
            per_base[i] = L_w + L_wv + 2
        ceiling = max(per_base.values(), default=2)
        return CeilingResult(total_generator_variation=W, word_variation=V,
                             per_base=per_base, ceiling=ceiling)

    # -- counting bounds ---------------------------------------------------

    def in_gap_linear_bound(self, family: GapFamily, n: int) -> LinearBound:
        """Linear bound k (1/eps + 1) (4 n c_eps + 4 n - 1) on in-gap
        separated points, with the matching A, B coefficients."""
        if family.c_eps is None:
            raise ValidationError("family is missing c_eps; call c_epsilon first")
        k, eps, c = family.k, family.eps, family.c_eps
        A = (4 * k + 4 * k / eps) * (1 + c)
        B = -(k + k / eps)
        bound = k * (1 / eps + 1) * (4 * n * c + 4 * n - 1)
        return LinearBound(A=A, B=B, n=n, bound=bound)


def overhead_factor(family: GapFamily, n: int, form: str,
                    q_hat: DistortionProfile | None = None) -> float:
    """The factor p(n) in s(n) <= p(n) s_restricted(n) + p(n).

    Form "A" uses the linear counting chain through c_eps; form "B" uses the
    distortion staircase, p(n) = 2 k (1 + 1/eps) (2 q_hat(2n) + 1) + 1.
    """
    k, eps = family.k, family.eps
    if k == 0:
        return 1.0
    if form == "A":
        if family.c_eps is None:
            raise ValidationError("family is missing c_eps; call c_epsilon first")
        return 2 * k * (1 + 1 / eps) * (4 * n * family.c_eps + 4 * n - 1) + 1
    if form == "B":
        if q_hat is None:
            raise ValidationError("form B needs a distortion staircase")
        return 2 * k * (1 + 1 / eps) * (2 * q_hat.q(2 * n) + 1) + 1
    raise ValidationError(f"unknown overhead form {form!r}")


# -- lemma sweeps -----------------------------------------------------------


def check_quasi_subadditivity(counter: DomainCounter, ctx: StabilizedGap,
                              f_letters, g_letters) -> CheckRecord:
    """ell_I(g f) <= ell_{f(I)}(g) + ell_I(f) + 1, and the sharper statement
    that the signed offset of g f is r + s or r + s + 1."""
    cnt_f = counter.count(ctx, f_letters)
    ctx_j = counter.conjugate_context(ctx, f_letters, cnt_f.image_gap)
    cnt_g = counter.count(ctx_j, g_letters)
    cnt_gf = counter.count(ctx, tuple(f_letters) + tuple(g_letters))
    bound_ok = cnt_gf.ell <= cnt_g.ell + cnt_f.ell + 1
    sharper_ok = cnt_gf.r in (cnt_f.r + cnt_g.r, cnt_f.r + cnt_g.r + 1)
    return CheckRecord(ok=bound_ok and sharper_ok, data={
        "gap_left": ctx.arc.left,
        "f": counter.system.word_label(f_letters),
        "g": counter.system.word_label(g_letters),
        "r": cnt_f.r, "s": cnt_g.r, "r_gf": cnt_gf.r,
        "ell_f": cnt_f.ell, "ell_g": cnt_g.ell, "ell_gf": cnt_gf.ell,
        "bound_ok": bound_ok, "sharper_ok": sharper_ok,
    })


def check_inverse_offset(counter: DomainCounter, ctx: StabilizedGap,
                         f_letters) -> CheckRecord:
    """|ell_I(f) - ell_{f(I)}(f^(-1))| <= 1."""
    cnt_f = counter.count(ctx, f_letters)
    ctx_j = counter.conjugate_context(ctx, f_letters, cnt_f.image_gap)
    cnt_inv = counter.count(ctx_j, counter.system.invert_letters(f_letters))
    ok = abs(cnt_f.ell - cnt_inv.ell) <= 1
    return CheckRecord(ok=ok, data={
        "gap_left": ctx.arc.left,
        "f": counter.system.word_label(f_letters),
        "ell_f": cnt_f.ell, "ell_f_inv": cnt_inv.ell,
    })


_SKIP_ERRORS = (GapImageNotFoundError, EscapedGapError, UnboundedDomainCountError)


def sweep_quasi_subadditivity(counter: DomainCounter, contexts: list[StabilizedGap],
                              ball: Ball, depth: int) -> LemmaReport:
    checked, violations, skipped = 0, [], []
    elements = ball.elements_up_to(depth)
    for ctx in contexts:
        for f in elements:
            for g in elements:
                try:
                    rec = check_quasi_subadditivity(counter, ctx, f.word, g.word)
                except _SKIP_ERRORS as exc:
                    skipped.append({
                        "gap_left": ctx.arc.left,
                        "f": counter.system.word_label(f.word),
                        "g": counter.system.word_label(g.word),
                        "reason": type(exc).__name__,
                    })
                    continue
                checked += 1
                if not rec.ok:
                    violations.append(rec.data)
    return LemmaReport(name="quasi_subadditivity", instances_checked=checked,
                       violations=violations, skipped=skipped,
                       parameters={"depth": depth, "contexts": len(contexts)})


def sweep_inverse_offset(counter: DomainCounter, contexts: list[StabilizedGap],
                         ball: Ball, depth: int) -> LemmaReport:
    checked, violations, skipped = 0, [], []
    for ctx in contexts:
        for f in ball.elements_up_to(depth):
            try:
                rec = check_inverse_offset(counter, ctx, f.word)
            except _SKIP_ERRORS as exc:
                skipped.append({
                    "gap_left": ctx.arc.left,
                    "f": counter.system.word_label(f.word),
                    "reason": type(exc).__name__,
                })
                continue
            checked += 1
            if not rec.ok:
                violations.append(rec.data)
    return LemmaReport(name="inverse_offset", instances_checked=checked,
                       violations=violations, skipped=skipped,
                       parameters={"depth": depth, "contexts": len(contexts)})


def sweep_distortion_box(counter: DomainCounter, contexts: list[StabilizedGap],
                         ball: Ball, depth: int, samples: int = 4096,
                         slack: float = 1e-6) -> LemmaReport:
    checked, violations, skipped = 0, [], []
    for ctx in contexts:
        for g in ball.elements_up_to(depth):
            try:
                if g.word:
                    V = log_derivative_variation(
                        WordMap(counter.system, g.word), ctx.arc, samples
                    ).value
                else:
                    V = 0.0
                box = counter.distortion_box(ctx, g.word, V, slack=slack)
            except _SKIP_ERRORS as exc:
                skipped.append({
                    "gap_left": ctx.arc.left,
                    "g": counter.system.word_label(g.word),
                    "reason": type(exc).__name__,
                })
                continue
            checked += 1
            if not box.contained:
                violations.append({
                    "gap_left": ctx.arc.left,
                    "g": counter.system.word_label(g.word),
                    "variation": V,
                    "pullback_rel": box.pullback_rel,
                    "margin": box.c_rel,
                })
    return LemmaReport(name="distortion_box", instances_checked=checked,
                       violations=violations, skipped=skipped,
                       parameters={"depth": depth, "samples": samples,
                                   "slack": slack, "contexts": len(contexts)})


def sweep_orbit_ceiling(counter: DomainCounter, family: GapFamily, ball: Ball,
                        depth: int, samples: int = 4096) -> LemmaReport:
    checked, violations, skipped = 0, [], []
    for f in ball.elements_up_to(depth):
        ceiling = counter.orbit_ceiling(family, f.word, samples)
        counts = counter.family_count(family, f.word)
        for j, observed in counts.per_gap.items():
            base = family.contexts[j].base_index
            limit = ceiling.per_base.get(base)
            if limit is None:
                continue
            checked += 1
            if observed > limit:
                violations.append({
                    "f": counter.system.word_label(f.word),
                    "gap_left": counter.gaps[j].arc.left,
                    "observed": observed,
                    "ceiling": limit,
                    "W": ceiling.total_generator_variation,
                    "V": ceiling.word_variation,
                })
        for j, reason in counts.skipped:
            skipped.append({
                "f": counter.system.word_label(f.word),
                "gap_left": counter.gaps[j].arc.left,
                "reason": reason,
            })
    return LemmaReport(name="orbit_ceiling", instances_checked=checked,
                       violations=violations, skipped=skipped,
                       parameters={"depth": depth, "samples": samples,
                                   "truncation_depth": family.truncation_depth})


# -- transfer of separated sets into the approximation ----------------------


def propagation_prefix(system: GeneratingSystem, letters, x: float, y: float,
                       eps: float) -> tuple[int | None, float]:
    """First prefix length r at which the tracked arc between x and y
    reaches length >= eps, together with that length.

    The tracked arc is the shorter one; while its length stays below eps it
    also stays below 1/2 (one generator step multiplies length by at most
    the Lipschitz constant, and eps < 1/(2L)), so at the crossing step the
    arc length equals the circle distance of its endpoints.
    """
    if forward_gap(x, y) <= 0.5:
        start, end = x, y
    else:
        start, end = y, x
    length = forward_gap(start, end)
    if length >= eps:
        return 0, length
    for r, i in enumerate(letters, start=1):
        start = system.maps[i](start)
        end = system.maps[i](end)
        length = forward_gap(start, end)
        if length >= eps:
            return r, length
    return None, length


@dataclass
class CoreTransfer:
    """A separated set moved into the approximation, with certificates."""

    points: list[float]
    components_hit: int
    certified: int
    pair_records: list[dict]
    all_verified: bool


def project_to_nonwandering(S: SeparatedSet, approx: NonWanderingApprox,
                            gaps: list[GapComponent], ball: Ball,
                            eps: float, n: int) -> CoreTransfer:
    """Pick one approximation point between successive odd/even separated-set
    gaps and certify the picked points are pairwise (n, eps)-separated.

    With t gap components holding points of S, the transfer produces
    floor(t/2) points; each pair is certified by propagating a recorded
    witness word prefix along the shorter arc between the two points (that
    arc contains at least two points of S by construction).
    """
    from .errors import ConstructionGapError

    system = ball.system
    hit: list[int] = []
    for t in S.points:
        if approx.contains(float(t)):
            continue
        for j, gap in enumerate(gaps):
            if gap.arc.contains(float(t)):
                if j not in hit:
                    hit.append(j)
                break
    hit.sort(key=lambda j: gaps[j].arc.left)
    t_count = len(hit)
    l = t_count // 2
    if l == 0:
        return CoreTransfer(points=[], components_hit=t_count, certified=0,
                            pair_records=[], all_verified=True)

    points: list[float] = []
    for i in range(l):
        right = gaps[hit[2 * i]].arc.right
        candidate = reduce_angle(right + approx.resolution / 2.0)
        if not approx.contains(candidate):
            candidate = right
        if not approx.contains(candidate):
            raise ConstructionGapError(
                f"no approximation point after the gap at {gaps[hit[2 * i]].arc.left:.6f}"
            )
        points.append(candidate)

    s_pts = [float(v) for v in S.points]
    m = len(s_pts)
    records: list[dict] = []
    verified = True
    for a in range(len(points)):
        for b in range(a + 1, len(points)):
            ti, tj = points[a], points[b]
            if forward_gap(ti, tj) <= 0.5:
                start, end = ti, tj
            else:
                start, end = tj, ti
            span = forward_gap(start, end)
            inside = [idx for idx, v in enumerate(s_pts)
                      if 0.0 < forward_gap(start, v) < span]
            witness_letters: tuple[int, ...] = ()
            if circle_dist(ti, tj) < eps:
                pair_idx = None
                for idx in inside:
                    if (idx + 1) % m in inside or m == 1:
                        nxt = (idx + 1) % m
                        if nxt in inside:
                            pair_idx = idx
                            break
                if pair_idx is None or S.witnesses == []:
                    verified = False
                    records.append({"pair": [ti, tj], "verified": False,
                                    "reason": "no adjacent separated pair inside the arc"})
                    continue
                w = S.witnesses[pair_idx]
                witness_letters = w.word if w is not None else ()
            r, length = propagation_prefix(system, witness_letters, ti, tj, eps)
            ok = r is not None and length <= 0.5
            verified = verified and ok
            records.append({
                "pair": [ti, tj],
                "verified": bool(ok),
                "prefix_length": r,
                "arc_length": length,
                "witness": system.word_label(witness_letters),
                "s_points_inside": len(inside),
            })
    return CoreTransfer(points=points, components_hit=t_count, certified=l,
                        pair_records=records, all_verified=verified)
