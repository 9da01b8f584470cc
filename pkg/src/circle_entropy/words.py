"""Symmetric generating systems, word balls, norms, and distortion profiles.

Group elements are known only through their action, so equality is decided
functionally: each element carries a fingerprint, the vector of images of K
fixed probe points, and two elements are merged when every coordinate agrees
within a tolerance (in circle distance). Probe points come from a seeded
golden-ratio Kronecker sequence, a low-discrepancy choice that spreads them
evenly; the (seed, K, tolerance) triple is echoed into every report so runs
are reproducible. False merges are possible in principle and are counted.

Balls are enumerated breadth-first over reduced words (no adjacent letter
cancelling its inverse), deduplicating at insertion, which certifies word
norms as a byproduct: the first discovery of an element happens at its norm,
and the stored representative is the lexicographically least shortest word.
"""

from __future__ import annotations

import hashlib
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError, ValidationError
from .geometry import circle_dist, uniform_grid
from .maps import map_spec

__all__ = [
    "FingerprintSpec",
    "GeneratingSystem",
    "Word",
    "BallElement",
    "Ball",
    "enumerate_ball",
    "word_norm",
    "growth_rate",
    "DistortionProfile",
    "distortion_profile",
    "free_ball_count",
    "dump_ball_csv",
]

_GOLDEN = 0.6180339887498949


@dataclass(frozen=True)
class FingerprintSpec:
    """Probe-point recipe for functional element equality."""

    seed: int = 7
    size: int = 64
    tolerance: float = 1e-8

    def probe_points(self) -> np.ndarray:
        offset = ((self.seed * 2654435761) % 2**32) / 2**32
        pts = (offset + np.arange(self.size) * _GOLDEN) % 1.0
        pts.setflags(write=False)
        return pts

    def ref(self) -> str:
        return f"seed={self.seed},k={self.size},tol={self.tolerance:g}"


class GeneratingSystem:
    """A symmetric finite generating set of circle homeomorphisms.

    Built from inverse-closed pairs: each entry (name, map) contributes the
    map and its functional inverse (named ``<name>^-1``) unless flagged as an
    involution, in which case the single generator is its own pair. Pairing
    is verified pointwise on a grid at construction.
    """

    def __init__(self, pairs, identity_tol: float = 1e-9):
        names: list[str] = []
        maps: list = []
        inverse_of: list[int] = []
        pair_count = 0
        for entry in pairs:
            if len(entry) == 3:
                name, m, involution = entry
            else:
                name, m = entry
                involution = False
            if involution:
                idx = len(names)
                names.append(name)
                maps.append(m)
                inverse_of.append(idx)
            else:
                idx = len(names)
                names.append(name)
                maps.append(m)
                names.append(f"{name}^-1")
                maps.append(m.inverse())
                inverse_of.extend([idx + 1, idx])
            pair_count += 1
        if len(names) < 2:
            raise ValidationError("a generating system needs at least one full pair")
        if len(set(names)) != len(names):
            raise ValidationError("generator names must be distinct")

        grid = uniform_grid(128)
        for i, m in enumerate(maps):
            imgs = maps[inverse_of[i]](m(grid))
            err = float(np.max(circle_dist(imgs, grid)))
            if err > identity_tol:
                raise ValidationError(
                    f"generator {names[i]!r}: paired inverse misses identity by {err:.3e}"
                )

        self.names = tuple(names)
        self.maps = tuple(maps)
        self.inverse_of = tuple(inverse_of)
        self.pair_count = pair_count
        self.identity_tol = identity_tol
        self.lipschitz = max(m.max_derivative for m in maps)

    @property
    def size(self) -> int:
        return len(self.names)

    def apply_word(self, letters, x):
        """Evaluate the composed word, first letter applied first."""
        for i in letters:
            x = self.maps[i](x)
        return x

    def word_derivative(self, letters, x):
        """Chain-rule derivative of the composed word at x."""
        d = np.ones_like(np.asarray(x, dtype=float)) if np.ndim(x) else 1.0
        for i in letters:
            d = d * self.maps[i].derivative(x)
            x = self.maps[i](x)
        return d

    def invert_letters(self, letters) -> tuple[int, ...]:
        return tuple(self.inverse_of[i] for i in reversed(letters))

    def free_reduce(self, letters) -> tuple[int, ...]:
        out: list[int] = []
        for i in letters:
            if out and self.inverse_of[i] == out[-1]:
                out.pop()
            else:
                out.append(i)
        return tuple(out)

    def word_label(self, letters) -> str:
        return " ".join(self.names[i] for i in letters) if letters else "<id>"

    def parse_word(self, text: str) -> tuple[int, ...]:
        lookup = {name: i for i, name in enumerate(self.names)}
        letters = []
        for token in text.replace(",", " ").split():
            if token not in lookup:
                raise ValidationError(f"unknown generator {token!r}")
            letters.append(lookup[token])
        return tuple(letters)

    def spec_echo(self) -> list[dict]:
        seen = []
        for i in range(self.size):
            if self.inverse_of[i] >= i:
                entry = {"name": self.names[i], **map_spec(self.maps[i])}
                if self.inverse_of[i] == i:
                    entry["involution"] = True
                seen.append(entry)
        return seen


@dataclass(frozen=True)
class Word:
    """A formal word in the generators; letters applied first-to-last."""

    letters: tuple[int, ...]
    reduced: bool = False


class WordMap:
    """Map-protocol view of a word: evaluate and differentiate like a primitive."""

    __slots__ = ("system", "letters")

    def __init__(self, system: GeneratingSystem, letters):
        self.system = system
        self.letters = tuple(letters)

    def __call__(self, t):
        return self.system.apply_word(self.letters, t)

    def derivative(self, t):
        return self.system.word_derivative(self.letters, t)


@dataclass(frozen=True, eq=False)
class BallElement:
    """A group element: shortest known word, certified norm, fingerprint."""

    word: tuple[int, ...]
    norm: int
    fingerprint: np.ndarray

    def fingerprint_hash(self) -> str:
        return hashlib.sha1(self.fingerprint.tobytes()).hexdigest()[:16]


class _FingerprintIndex:
    """Tolerance dedup index: bucket on two quantized coordinates, then scan.

    Matching fingerprints differ by at most the tolerance per coordinate, so
    they land in the same or an adjacent bucket; lookups scan the 3x3 cell
    neighborhood (with wraparound) and compare coordinates in circle
    distance with an early exit at the first rejecting one. The smallest
    rejecting difference ever seen is kept as a margin diagnostic: when it
    sits well above the tolerance, no borderline merges occurred.
    """

    CELLS = 10000  # bucket width 1e-4 per coordinate

    def __init__(self, tolerance: float):
        self.tolerance = tolerance
        self.buckets: dict[tuple[int, int], list[tuple[list[float], int]]] = {}
        self.min_margin = float("inf")

    def lookup(self, fp: np.ndarray):
        q = fp.tolist()
        k0 = int(q[0] * self.CELLS) % self.CELLS
        k1 = int(q[1] * self.CELLS) % self.CELLS
        tol = self.tolerance
        margin = self.min_margin
        hit = None
        for d0 in (-1, 0, 1):
            for d1 in (-1, 0, 1):
                bucket = self.buckets.get(((k0 + d0) % self.CELLS, (k1 + d1) % self.CELLS))
                if not bucket:
                    continue
                for other, idx in bucket:
                    reject = -1.0
                    for a, b in zip(other, q):
                        d = a - b
                        if d < 0.0:
                            d = -d
                        if d > 0.5:
                            d = 1.0 - d
                        if d > tol:
                            reject = d
                            break
                    if reject < 0.0:
                        hit = idx
                        break
                    if reject < margin:
                        margin = reject
                if hit is not None:
                    break
            if hit is not None:
                break
        self.min_margin = margin
        return hit

    def insert(self, fp: np.ndarray, idx: int):
        q = fp.tolist()
        key = (int(q[0] * self.CELLS) % self.CELLS, int(q[1] * self.CELLS) % self.CELLS)
        self.buckets.setdefault(key, []).append((q, idx))


class Ball:
    """The deduplicated ball B(n), elements in canonical (norm, word) order."""

    def __init__(self, system: GeneratingSystem, spec: FingerprintSpec, depth: int,
                 elements: list[BallElement], index: _FingerprintIndex, merges: int):
        self.system = system
        self.spec = spec
        self.depth = depth
        self.elements = elements
        self.index = index
        self.merges = merges
        self._norms = [e.norm for e in elements]

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def identity(self) -> BallElement:
        return self.elements[0]

    def size_at(self, n: int) -> int:
        """#B(n) for n up to the enumerated depth."""
        return bisect_right(self._norms, n)

    def elements_up_to(self, n: int) -> list[BallElement]:
        return self.elements[: self.size_at(n)]

    def element_of_fingerprint(self, fp: np.ndarray) -> BallElement | None:
        idx = self.index.lookup(fp)
        return None if idx is None else self.elements[idx]

    @property
    def min_separation_margin(self) -> float:
        return self.index.min_margin

    def ref(self) -> str:
        return f"{self.spec.ref()},depth={self.depth}"


def enumerate_ball(system: GeneratingSystem, n: int,
                   spec: FingerprintSpec | None = None,
                   max_size: int = 5_000_000) -> Ball:
    """Breadth-first enumeration of B(n) over reduced words with dedup.

    Fingerprints propagate parent to child (one primitive application per
    word), keeping enumeration linear in the number of generated words.
    Raises ResourceLimitError naming the depth reached when the ball
    exceeds ``max_size``.
    """
    if n < 0:
        raise ValidationError("ball radius must be nonnegative")
    spec = spec or FingerprintSpec()
    probes = spec.probe_points()
    index = _FingerprintIndex(spec.tolerance)

    identity = BallElement(word=(), norm=0, fingerprint=probes.copy())
    elements = [identity]
    index.insert(identity.fingerprint, 0)
    merges = 0

    frontier: list[tuple[tuple[int, ...], np.ndarray]] = [((), probes)]
    for depth in range(1, n + 1):
        new_frontier: list[tuple[tuple[int, ...], np.ndarray]] = []
        for word, fp in frontier:
            last = word[-1] if word else None
            for j in range(system.size):
                if last is not None and j == system.inverse_of[last]:
                    continue
                child_fp = system.maps[j](fp)
                if index.lookup(child_fp) is None:
                    idx = len(elements)
                    if idx >= max_size:
                        raise ResourceLimitError(depth_reached=depth, size=idx + 1, cap=max_size)
                    child_fp.setflags(write=False)
                    el = BallElement(word=word + (j,), norm=depth, fingerprint=child_fp)
                    elements.append(el)
                    index.insert(child_fp, idx)
                    new_frontier.append((el.word, child_fp))
                else:
                    merges += 1
        frontier = new_frontier
    return Ball(system, spec, n, elements, index, merges)


def word_norm(system: GeneratingSystem, letters, n_max: int,
              ball: Ball | None = None) -> int | None:
    """Certified word norm via ball membership; None when it exceeds n_max."""
    if ball is None:
        ball = enumerate_ball(system, n_max)
    elif ball.depth < n_max:
        raise ValidationError(f"supplied ball only reaches depth {ball.depth} < {n_max}")
    fp = system.apply_word(letters, ball.spec.probe_points())
    el = ball.element_of_fingerprint(fp)
    if el is None or el.norm > n_max:
        return None
    return el.norm


def growth_rate(ball: Ball, n_max: int | None = None) -> list[tuple[int, float]]:
    """The sequence (n, log #B(n) / n); the last entry estimates the growth."""
    n_max = ball.depth if n_max is None else n_max
    return [(k, float(np.log(ball.size_at(k))) / k) for k in range(1, n_max + 1)]


@dataclass(frozen=True)
class DistortionProfile:
    """Norms of powers of a fixed element plus the induced staircase.

    ``rows`` holds (r, |h^r| or None) with None marking entries censored by
    the search depth. ``q_hat`` is the least non-decreasing table with
    q_hat(|h^r|) >= r over the computed range: q_hat[v] is the largest
    computed power whose norm is at most v. No claim beyond the computed
    range is made.
    """

    word: tuple[int, ...]
    rows: tuple[tuple[int, int | None], ...]
    q_hat: tuple[int, ...]
    n_max: int

    def q(self, v: int) -> int:
        if v < 0 or v >= len(self.q_hat):
            from .errors import CensoredValueError

            raise CensoredValueError(
                f"staircase computed through norm {len(self.q_hat) - 1}, needs argument {v}"
            )
        return self.q_hat[v]

    @property
    def censored(self) -> int:
        return sum(1 for _, v in self.rows if v is None)


def distortion_profile(system: GeneratingSystem, letters, r_max: int, n_max: int,
                       ball: Ball | None = None) -> DistortionProfile:
    """Compute |h^r| for r = 1..r_max by ball membership of iterated fingerprints."""
    if ball is None:
        ball = enumerate_ball(system, n_max)
    spec = ball.spec
    probes = spec.probe_points()
    fp = probes.copy()
    base = system.apply_word(letters, probes)
    if float(np.max(np.minimum(np.abs(base - probes), 1 - np.abs(base - probes)))) <= spec.tolerance:
        raise ValidationError("distortion profile needs a nontrivial element")

    rows: list[tuple[int, int | None]] = []
    for r in range(1, r_max + 1):
        fp = system.apply_word(letters, fp)
        el = ball.element_of_fingerprint(fp)
        rows.append((r, None if el is None or el.norm > n_max else el.norm))

    q = np.zeros(n_max + 1, dtype=int)
    for r, v in rows:
        if v is not None:
            q[v] = max(q[v], r)
    q = np.maximum.accumulate(q)
    return DistortionProfile(word=tuple(letters), rows=tuple(rows),
                             q_hat=tuple(int(x) for x in q), n_max=n_max)


def free_ball_count(pairs: int, n: int) -> int:
    """Reduced-word count 1 + sum_{j<=n} 2p (2p-1)^(j-1) for p generator pairs."""
    total = 1
    for j in range(1, n + 1):
        total += 2 * pairs * (2 * pairs - 1) ** (j - 1)
    return total


def dump_ball_csv(ball: Ball, path) -> None:
    lines = ["norm,word,fingerprint_hash"]
    for el in ball.elements:
        lines.append(f"{el.norm},{ball.system.word_label(el.word)},{el.fingerprint_hash()}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
