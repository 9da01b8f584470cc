"""Numerical entropy estimation for finitely generated group actions on the circle.

The package computes (n, eps)-separated sets over word balls, approximates
the non-wandering set from wandering certificates, classifies the gap
components of its complement by their stabilizers, and evaluates the
fundamental-domain counting calculus that controls how much separation a
single gap can carry. A CLI harness runs bundled or user scenarios end to
end and emits deterministic CSV/JSON artifacts.
"""

from .geometry import Arc, CirclePoint, circle_dist, reduce_angle, uniform_grid
from .maps import (
    Mobius,
    PiecewiseLinear,
    Rotation,
    circle_log_derivative_variation,
    log_derivative_variation,
    map_from_spec,
)
from .words import (
    Ball,
    BallElement,
    FingerprintSpec,
    GeneratingSystem,
    Word,
    WordMap,
    distortion_profile,
    enumerate_ball,
    free_ball_count,
    growth_rate,
    word_norm,
)
from .separation import (
    EntropyCurve,
    SeparatedSet,
    build_separation_profile,
    check_restriction_inequality,
    entropy_at_scale,
    is_separated,
    max_separated_exact,
    max_separated_greedy,
    restricted_entropy,
)
from .wandering import (
    GapComponent,
    NonWanderingApprox,
    approximate_nonwandering,
    classify_all,
    classify_component,
    gap_components,
)
from .domains import (
    DomainCounter,
    GapFamily,
    StabilizedGap,
    overhead_factor,
    project_to_nonwandering,
    propagation_prefix,
)
from .scenario import Scenario, bundled_names, bundled_scenario, load_scenario
from .pipeline import RunReport, compare_reports, compare_within, run_scenario

__version__ = "0.1.0"
