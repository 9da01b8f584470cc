"""Points, arcs, and distances on the circle R/Z.

The circle carries normalized length (total circumference 1). A point is a
coordinate t in [0, 1); an arc is the open interval ]left, left + length[
traversed in the positive direction, so an arc may wrap through 0. Distance
is the shorter-side arc length, circle_dist(x, y) = min(|x-y|, 1-|x-y|),
which takes values in [0, 1/2].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = [
    "CirclePoint",
    "Arc",
    "reduce_angle",
    "circle_dist",
    "forward_gap",
    "signed_offset",
    "uniform_grid",
    "as_coordinate",
]


def reduce_angle(t):
    """Reduce a coordinate (scalar or array) into [0, 1). Idempotent.

    Handles the float quirk where x % 1.0 rounds up to exactly 1.0 for
    tiny negative x.
    """
    if np.ndim(t) == 0:
        r = float(t) % 1.0
        return r if r < 1.0 else 0.0
    r = np.asarray(t, dtype=float) % 1.0
    return np.where(r >= 1.0, 0.0, r)


def circle_dist(x, y):
    """Shorter-arc distance on R/Z, in [0, 1/2]."""
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        d = abs(float(x) - float(y)) % 1.0
        return min(d, 1.0 - d)
    d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)) % 1.0
    return np.minimum(d, 1.0 - d)


def forward_gap(x, y):
    """Length of the positively oriented arc from x to y, in [0, 1)."""
    if np.ndim(x) == 0 and np.ndim(y) == 0:
        return reduce_angle(float(y) - float(x))
    return reduce_angle(np.asarray(y, dtype=float) - np.asarray(x, dtype=float))


def signed_offset(x, ref):
    """Signed displacement of x relative to ref, folded into [-1/2, 1/2)."""
    if np.ndim(x) == 0 and np.ndim(ref) == 0:
        return ((float(x) - float(ref) + 0.5) % 1.0) - 0.5
    return ((np.asarray(x, dtype=float) - np.asarray(ref, dtype=float) + 0.5) % 1.0) - 0.5


def uniform_grid(m: int) -> np.ndarray:
    """m equally spaced points j/m, sorted, starting at 0."""
    if m < 1:
        raise ValidationError("grid needs at least one point")
    return np.arange(m, dtype=float) / m


def as_coordinate(x) -> float:
    """Accept a CirclePoint or a bare coordinate and return the reduced float."""
    if isinstance(x, CirclePoint):
        return x.t
    return reduce_angle(float(x))


@dataclass(frozen=True)
class CirclePoint:
    """A point of R/Z, stored as the reduced coordinate t in [0, 1)."""

    t: float

    def __post_init__(self):
        object.__setattr__(self, "t", reduce_angle(self.t))

    def __float__(self) -> float:
        return self.t

    def dist(self, other) -> float:
        return circle_dist(self.t, as_coordinate(other))


@dataclass(frozen=True)
class Arc:
    """The open arc ]left, left + length[ with 0 < length < 1.

    An arc of length < 1/2 has arc length equal to the circle distance
    between its endpoints; longer arcs wrap past the antipode of their
    left endpoint.
    """

    left: float
    length: float

    def __post_init__(self):
        object.__setattr__(self, "left", reduce_angle(self.left))
        if not (0.0 < self.length < 1.0):
            raise ValidationError(f"arc length must be in (0, 1), got {self.length}")

    @property
    def right(self) -> float:
        return reduce_angle(self.left + self.length)

    @property
    def midpoint(self) -> float:
        return reduce_angle(self.left + self.length / 2.0)

    def contains(self, t, closed: bool = False):
        """Membership test; closed=True includes the endpoints."""
        g = forward_gap(self.left, t)
        if closed:
            return (g <= self.length) | (g >= 1.0 - 1e-15) if np.ndim(t) else (
                g <= self.length or g >= 1.0 - 1e-15
            )
        if np.ndim(t):
            return (g > 0.0) & (g < self.length)
        return 0.0 < g < self.length

    def sample(self, n: int) -> np.ndarray:
        """n points spanning the closed arc uniformly, endpoints included."""
        if n < 2:
            raise ValidationError("need at least two sample points")
        return reduce_angle(self.left + self.length * np.linspace(0.0, 1.0, n))

    def interior_sample(self, n: int) -> np.ndarray:
        """n points strictly inside the arc, away from both endpoints."""
        if n < 1:
            raise ValidationError("need at least one sample point")
        fractions = (np.arange(n, dtype=float) + 1.0) / (n + 1.0)
        return reduce_angle(self.left + self.length * fractions)
