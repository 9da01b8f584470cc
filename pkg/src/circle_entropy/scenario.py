"""Scenario configuration: schema, validation, and bundled fixtures.

A scenario is a single JSON document. Generator entries describe inverse
pairs (the inverse is constructed, not listed). All tolerances and caps
have defaults and are echoed into reports, so a report plus the package
version reproduces the run exactly.

Schema (defaults in parentheses):

    name                  str
    generators            [{name, kind, ...map params, involution?}, ...]
    epsilon_list          [float, ...]     scales, each < 1/(2L)
    n_max                 int              entropy depth range
    delta                 float            grid resolution for the
                                           non-wandering approximation
    n_omega               int              certification depth
    classification_depth  int (6)          gap stabilizer search depth
    orbit_depth           int (n_max)      family orbit truncation
    grid_spacing_factor   int (4)          grid spacing = eps / factor
    max_ball_size         int (5e6)
    fingerprint           {seed (7), size (64), tolerance (1e-8)}
    tau_fix_factor        float (10)       setwise-fix tolerance, times delta
    variation_samples     int (4096)
    max_iterations        int (1e6)        fundamental-domain iteration cap
    slope_tolerance       float (0.1)      full vs restricted slope verdict
    lemma_depths          {quasi_subadditivity (4), inverse_offset (6),
                           distortion_box (5), orbit_ceiling (3)}
    distortion            null | {word, r_max (20), search_depth (2 n_max)}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

from .errors import ConfigurationError
from .maps import map_from_spec
from .words import FingerprintSpec, GeneratingSystem

__all__ = ["Scenario", "load_scenario", "bundled_scenario", "bundled_names"]

_DEFAULT_LEMMA_DEPTHS = {
    "quasi_subadditivity": 4,
    "inverse_offset": 6,
    "distortion_box": 5,
    "orbit_ceiling": 3,
}


@dataclass
class Scenario:
    name: str
    generators: list[dict]
    epsilon_list: list[float]
    n_max: int
    delta: float
    n_omega: int
    classification_depth: int = 6
    orbit_depth: int | None = None
    grid_spacing_factor: int = 4
    max_ball_size: int = 5_000_000
    fingerprint: FingerprintSpec = field(default_factory=FingerprintSpec)
    tau_fix_factor: float = 10.0
    variation_samples: int = 4096
    max_iterations: int = 1_000_000
    slope_tolerance: float = 0.1
    lemma_depths: dict = field(default_factory=lambda: dict(_DEFAULT_LEMMA_DEPTHS))
    distortion: dict | None = None

    def build_system(self) -> GeneratingSystem:
        pairs = []
        for spec in self.generators:
            if "name" not in spec:
                raise ConfigurationError("generator entry missing 'name'")
            m = map_from_spec(spec)
            pairs.append((spec["name"], m, bool(spec.get("involution", False))))
        return GeneratingSystem(pairs)

    def validate(self) -> GeneratingSystem:
        """Full validation; returns the constructed generating system."""
        if not self.generators:
            raise ConfigurationError("scenario needs at least one generator pair")
        system = self.build_system()
        if not self.epsilon_list:
            raise ConfigurationError("epsilon_list must be nonempty")
        limit = 1.0 / (2.0 * system.lipschitz)
        for eps in self.epsilon_list:
            if not (0.0 < eps < 0.5):
                raise ConfigurationError(f"epsilon {eps} outside (0, 1/2)")
            if eps >= limit:
                raise ConfigurationError(
                    f"epsilon {eps} violates eps < 1/(2L) with L = {system.lipschitz:g}"
                )
        for key, value in [("n_max", self.n_max), ("n_omega", self.n_omega),
                           ("classification_depth", self.classification_depth),
                           ("grid_spacing_factor", self.grid_spacing_factor),
                           ("max_ball_size", self.max_ball_size),
                           ("variation_samples", self.variation_samples),
                           ("max_iterations", self.max_iterations)]:
            if value is None or value <= 0:
                raise ConfigurationError(f"{key} must be positive, got {value}")
        if not (0.0 < self.delta < 0.25):
            raise ConfigurationError(f"delta {self.delta} outside (0, 1/4)")
        if self.grid_spacing_factor < 4:
            raise ConfigurationError("grid_spacing_factor must be at least 4")
        if self.slope_tolerance <= 0:
            raise ConfigurationError("slope_tolerance must be positive")
        for key in _DEFAULT_LEMMA_DEPTHS:
            if key not in self.lemma_depths or self.lemma_depths[key] < 0:
                raise ConfigurationError(f"lemma depth {key!r} missing or negative")
        if self.distortion is not None:
            if "word" not in self.distortion:
                raise ConfigurationError("distortion block needs a 'word'")
            system.parse_word(self.distortion["word"])
        return system

    @property
    def effective_orbit_depth(self) -> int:
        return self.n_max if self.orbit_depth is None else self.orbit_depth

    def grid_size(self, eps: float) -> int:
        return math.ceil(self.grid_spacing_factor / eps)

    def ball_depth(self) -> int:
        depth = max(self.n_max, self.n_omega, self.classification_depth,
                    self.effective_orbit_depth, *self.lemma_depths.values())
        if self.distortion is not None:
            depth = max(depth, int(self.distortion.get("search_depth", 2 * self.n_max)))
        return depth

    def distortion_params(self) -> tuple[str, int, int] | None:
        if self.distortion is None:
            return None
        word = self.distortion["word"]
        r_max = int(self.distortion.get("r_max", 20))
        search = int(self.distortion.get("search_depth", 2 * self.n_max))
        return word, r_max, search

    def echo(self) -> dict:
        return {
            "name": self.name,
            "generators": self.generators,
            "epsilon_list": self.epsilon_list,
            "n_max": self.n_max,
            "delta": self.delta,
            "n_omega": self.n_omega,
            "classification_depth": self.classification_depth,
            "orbit_depth": self.effective_orbit_depth,
            "grid_spacing_factor": self.grid_spacing_factor,
            "max_ball_size": self.max_ball_size,
            "fingerprint": {
                "seed": self.fingerprint.seed,
                "size": self.fingerprint.size,
                "tolerance": self.fingerprint.tolerance,
            },
            "tau_fix_factor": self.tau_fix_factor,
            "variation_samples": self.variation_samples,
            "max_iterations": self.max_iterations,
            "slope_tolerance": self.slope_tolerance,
            "lemma_depths": self.lemma_depths,
            "distortion": self.distortion,
        }


def _scenario_from_dict(data: dict) -> Scenario:
    try:
        fp = data.get("fingerprint", {})
        return Scenario(
            name=data["name"],
            generators=data["generators"],
            epsilon_list=[float(e) for e in data["epsilon_list"]],
            n_max=int(data["n_max"]),
            delta=float(data["delta"]),
            n_omega=int(data["n_omega"]),
            classification_depth=int(data.get("classification_depth", 6)),
            orbit_depth=data.get("orbit_depth"),
            grid_spacing_factor=int(data.get("grid_spacing_factor", 4)),
            max_ball_size=int(data.get("max_ball_size", 5_000_000)),
            fingerprint=FingerprintSpec(
                seed=int(fp.get("seed", 7)),
                size=int(fp.get("size", 64)),
                tolerance=float(fp.get("tolerance", 1e-8)),
            ),
            tau_fix_factor=float(data.get("tau_fix_factor", 10.0)),
            variation_samples=int(data.get("variation_samples", 4096)),
            max_iterations=int(data.get("max_iterations", 1_000_000)),
            slope_tolerance=float(data.get("slope_tolerance", 0.1)),
            lemma_depths={**_DEFAULT_LEMMA_DEPTHS, **data.get("lemma_depths", {})},
            distortion=data.get("distortion"),
        )
    except KeyError as exc:
        raise ConfigurationError(f"scenario config missing key {exc.args[0]!r}") from exc


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return _scenario_from_dict(json.load(fh))


def bundled_names() -> list[str]:
    root = resources.files("circle_entropy").joinpath("scenarios")
    return sorted(p.name.removesuffix(".json") for p in root.iterdir()
                  if p.name.endswith(".json"))


def bundled_scenario(name: str) -> Scenario:
    res = resources.files("circle_entropy").joinpath(f"scenarios/{name}.json")
    if not res.is_file():
        raise ConfigurationError(
            f"no bundled scenario {name!r}; available: {', '.join(bundled_names())}"
        )
    return _scenario_from_dict(json.loads(res.read_text()))
