"""Primitive orientation-preserving circle homeomorphisms.

Three closed-form families: rigid rotations, Moebius transformations from
PSL(2, R) acting on the projective line, and piecewise-linear maps. The
circle is R/Z. Moebius matrices act through the projective chart
x = tan(pi (t - 1/2)); internally a point is the direction vector
u(t) = (sin(pi (t - 1/2)), cos(pi (t - 1/2))), so the chart's point at
infinity (t = 0) needs no special casing and evaluation never overflows.

Derivatives are taken with respect to t. For a determinant-1 matrix M the
chain rule in this chart collapses to dt'/dt = 1 / |M u(t)|^2, which also
yields the exact Lipschitz constant sup f' = sigma_max(M)^2.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

import numpy as np

from .errors import MapValidationError
from .geometry import Arc, reduce_angle, uniform_grid

__all__ = [
    "Rotation",
    "Mobius",
    "PiecewiseLinear",
    "VariationEstimate",
    "log_derivative_variation",
    "circle_log_derivative_variation",
    "map_from_spec",
    "map_spec",
]


@dataclass(frozen=True)
class Rotation:
    """Rigid rotation t -> t + angle (mod 1). An isometry, derivative 1."""

    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", reduce_angle(self.angle))

    def __call__(self, t):
        return reduce_angle(np.asarray(t) + self.angle) if np.ndim(t) else reduce_angle(float(t) + self.angle)

    def derivative(self, t):
        return np.ones_like(np.asarray(t, dtype=float)) if np.ndim(t) else 1.0

    def inverse(self) -> "Rotation":
        return Rotation(-self.angle)

    @property
    def max_derivative(self) -> float:
        return 1.0


class Mobius:
    """Projective action of a positive-determinant 2x2 real matrix.

    The matrix is normalized to determinant 1 at construction. Negative
    determinant (orientation reversing) is rejected.
    """

    __slots__ = ("m",)

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float)
        if m.shape != (2, 2):
            raise MapValidationError("Moebius matrix must be 2x2")
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if not np.isfinite(det) or det <= 0:
            raise MapValidationError(f"Moebius matrix needs positive determinant, got {det}")
        m = m / math.sqrt(det)
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def __repr__(self):
        return f"Mobius({self.m.tolist()})"

    def _direction(self, t):
        phi = math.pi * (t - 0.5)
        if np.ndim(t):
            return np.sin(phi), np.cos(phi)
        return math.sin(phi), math.cos(phi)

    def __call__(self, t):
        a, b = self.m[0]
        c, d = self.m[1]
        if np.ndim(t) == 0:
            s, co = self._direction(float(t))
            v0 = a * s + b * co
            v1 = c * s + d * co
            if v1 < 0.0 or (v1 == 0.0 and v0 < 0.0):
                v0, v1 = -v0, -v1
            return reduce_angle(math.atan2(v0, v1) / math.pi + 0.5)
        s, co = self._direction(np.asarray(t, dtype=float))
        v0 = a * s + b * co
        v1 = c * s + d * co
        flip = (v1 < 0.0) | ((v1 == 0.0) & (v0 < 0.0))
        v0 = np.where(flip, -v0, v0)
        v1 = np.where(flip, -v1, v1)
        return reduce_angle(np.arctan2(v0, v1) / math.pi + 0.5)

    def derivative(self, t):
        a, b = self.m[0]
        c, d = self.m[1]
        if np.ndim(t) == 0:
            s, co = self._direction(float(t))
            v0 = a * s + b * co
            v1 = c * s + d * co
            return 1.0 / (v0 * v0 + v1 * v1)
        s, co = self._direction(np.asarray(t, dtype=float))
        v0 = a * s + b * co
        v1 = c * s + d * co
        return 1.0 / (v0 * v0 + v1 * v1)

    def inverse(self) -> "Mobius":
        a, b = self.m[0]
        c, d = self.m[1]
        return Mobius([[d, -b], [-c, a]])

    @property
    def max_derivative(self) -> float:
        # det 1 implies sigma_min = 1/sigma_max, so sup f' = sigma_max^2
        return float(np.linalg.svd(self.m, compute_uv=False)[0] ** 2)


class PiecewiseLinear:
    """Piecewise-linear circle homeomorphism given by breakpoint pairs.

    ``breakpoints`` is a list of (t_i, y_i) with the t_i strictly increasing
    in [0, 1) and the image sequence y_i cyclically increasing (at most one
    wrap). The lift is stored as arrays xs, ys with xs[-1] = xs[0] + 1 and
    ys[-1] = ys[0] + 1; all slopes are positive by construction. Validation
    happens here, never at evaluation time.
    """

    __slots__ = ("breakpoints", "xs", "ys", "slopes")

    def __init__(self, breakpoints):
        pts = [(reduce_angle(float(t)), reduce_angle(float(y))) for t, y in breakpoints]
        if len(pts) < 1:
            raise MapValidationError("need at least one breakpoint")
        ts = [p[0] for p in pts]
        if any(ts[i] >= ts[i + 1] for i in range(len(ts) - 1)):
            raise MapValidationError("breakpoint coordinates must be strictly increasing")
        ys_raw = [p[1] for p in pts]
        lift = [ys_raw[0]]
        offset = 0.0
        for y in ys_raw[1:]:
            if y + offset <= lift[-1]:
                offset += 1.0
            if y + offset <= lift[-1] or offset > 1.0:
                raise MapValidationError("breakpoint images are not cyclically increasing")
            lift.append(y + offset)
        if ys_raw[0] + 1.0 <= lift[-1]:
            raise MapValidationError("breakpoint images wrap more than once")
        xs = np.array(ts + [ts[0] + 1.0])
        ys = np.array(lift + [ys_raw[0] + 1.0])
        slopes = np.diff(ys) / np.diff(xs)
        if np.any(slopes <= 0):
            raise MapValidationError("all segment slopes must be positive")
        self.breakpoints = tuple(pts)
        self.xs = xs
        self.ys = ys
        self.slopes = slopes

    def __repr__(self):
        return f"PiecewiseLinear({list(self.breakpoints)})"

    def _anchor(self, t):
        if np.ndim(t) == 0:
            return self.xs[0] + reduce_angle(float(t) - self.xs[0])
        return self.xs[0] + reduce_angle(np.asarray(t, dtype=float) - self.xs[0])

    def __call__(self, t):
        u = self._anchor(t)
        if np.ndim(t) == 0:
            return reduce_angle(float(np.interp(u, self.xs, self.ys)))
        return reduce_angle(np.interp(u, self.xs, self.ys))

    def derivative(self, t):
        """Slope of the containing segment; right-continuous at breakpoints."""
        u = self._anchor(t)
        if np.ndim(t) == 0:
            idx = min(bisect_right(self.xs, u) - 1, len(self.slopes) - 1)
            return float(self.slopes[idx])
        idx = np.clip(np.searchsorted(self.xs, u, side="right") - 1, 0, len(self.slopes) - 1)
        return self.slopes[idx]

    def derivative_info(self, t: float) -> tuple[float, bool]:
        """(slope, one_sided): one_sided is True when t sits on a breakpoint."""
        u = self._anchor(t)
        one_sided = bool(np.any(np.abs(self.xs[:-1] - u) == 0.0))
        return self.derivative(t), one_sided

    def inverse(self) -> "PiecewiseLinear":
        pairs = [(reduce_angle(y), reduce_angle(x)) for x, y in zip(self.xs[:-1], self.ys[:-1])]
        start = min(range(len(pairs)), key=lambda i: pairs[i][0])
        return PiecewiseLinear(pairs[start:] + pairs[:start])

    @property
    def max_derivative(self) -> float:
        return float(self.slopes.max())


@dataclass(frozen=True)
class VariationEstimate:
    """A sampled total-variation value together with its sample count."""

    value: float
    samples: int

    def __float__(self) -> float:
        return self.value


def _log_derivatives(map_like, xs: np.ndarray) -> np.ndarray:
    d = np.asarray(map_like.derivative(xs), dtype=float)
    if np.any(d <= 0) or not np.all(np.isfinite(d)):
        raise MapValidationError("derivative must be positive and finite on the sample grid")
    return np.log(d)

def log_derivative_variation(map_like, arc: Arc, samples: int = 4096) -> VariationEstimate:
    """Sampled total variation of log f' over an arc.

    Uses a uniform grid of the closed arc. For maps whose derivative is
    monotone along the arc the sampled value equals the true variation;
    in general it is a lower bound that increases under grid refinement.
    Breakpoint jumps of piecewise-linear maps are picked up by the samples.
    """
    if samples < 2:
        raise MapValidationError("variation needs at least two samples")
    logd = _log_derivatives(map_like, arc.sample(samples))
    return VariationEstimate(float(np.abs(np.diff(logd)).sum()), samples)


def circle_log_derivative_variation(map_like, samples: int = 4096) -> VariationEstimate:
    """Sampled total variation of log f' around the whole circle (cyclic)."""
    if samples < 2:
        raise MapValidationError("variation needs at least two samples")
    logd = _log_derivatives(map_like, uniform_grid(samples))
    total = float(np.abs(np.diff(logd)).sum() + abs(logd[0] - logd[-1]))
    return VariationEstimate(total, samples)


def map_from_spec(spec: dict):
    """Build a primitive map from a config dictionary (kind tag + parameters)."""
    kind = spec.get("kind")
    if kind == "rotation":
        return Rotation(float(spec["angle"]))
    if kind == "mobius":
        return Mobius(spec["matrix"])
    if kind == "piecewise_linear":
        return PiecewiseLinear([(float(t), float(y)) for t, y in spec["breakpoints"]])
    raise MapValidationError(f"unknown map kind {kind!r}")


def map_spec(m) -> dict:
    """Inverse of map_from_spec, used to echo scenarios into reports."""
    if isinstance(m, Rotation):
        return {"kind": "rotation", "angle": m.angle}
    if isinstance(m, Mobius):
        return {"kind": "mobius", "matrix": [list(row) for row in m.m.tolist()]}
    if isinstance(m, PiecewiseLinear):
        return {"kind": "piecewise_linear", "breakpoints": [list(p) for p in m.breakpoints]}
    raise MapValidationError(f"cannot serialize map {m!r}")
