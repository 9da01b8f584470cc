import itertools
import math

import numpy as np
import pytest

from circle_entropy.errors import (
    EmptyRestrictionError,
    ExactOracleCapError,
    ValidationError,
)
from circle_entropy.geometry import circle_dist, uniform_grid
from circle_entropy.maps import Rotation
from circle_entropy.separation import (
    build_separation_profile,
    check_restriction_inequality,
    entropy_at_scale,
    is_separated,
    max_separated_exact,
    max_separated_greedy,
    restricted_entropy,
    tail_window,
)
from circle_entropy.words import GeneratingSystem, enumerate_ball
from circle_entropy.domains import propagation_prefix
from conftest import ROT_ANGLE


def test_is_separated_trivial(rotation_system):
    ball = enumerate_ball(rotation_system, 2)
    ok, witness = is_separated(rotation_system, 0.2, 0.2, ball.elements, 0.1)
    assert not ok and witness is None
    ok, witness = is_separated(rotation_system, 0.1, 0.4, ball.elements, 0.1)
    assert ok and witness.norm == 0  # the identity witnesses distant pairs


def test_is_separated_hyperbolic_expansion(hyperbolic_bundle):
    # two points near the repelling fixed point at distance eps/4 separate
    # once a power of the generator expands them past eps
    system, ball = hyperbolic_bundle["system"], hyperbolic_bundle["ball"]
    eps = 0.1
    x, y = 0.5 - eps / 8, 0.5 + eps / 8
    ok, witness = is_separated(system, x, y, ball.elements, eps)
    assert ok
    assert set(witness.word) <= {0, 1} and len(witness.word) >= 1
    # iterate the generator directly to find the needed depth
    n_needed = None
    cx, cy = x, y
    for n in range(1, 21):
        cx, cy = system.maps[0](cx), system.maps[0](cy)
        if circle_dist(cx, cy) >= eps:
            n_needed = n
            break
    assert n_needed is not None and witness.norm <= n_needed


def test_greedy_identity_ball_is_eps_net():
    # dyadic grid and scale make the distance comparisons exact
    system = GeneratingSystem([("e", Rotation(0.0))])
    ball = enumerate_ball(system, 0)
    eps = 1.0 / 64.0
    profile = build_separation_profile(ball, uniform_grid(512), eps, 0)
    got = max_separated_greedy(profile, 0)
    assert len(got) == 64  # floor(1/eps) points
    assert not got.grid_too_coarse
    assert got.mode == "greedy-lower"


def test_greedy_rotation_isometry_count():
    system = GeneratingSystem([("r", Rotation(ROT_ANGLE))])
    ball = enumerate_ball(system, 14)
    eps = 1.0 / 64.0
    profile = build_separation_profile(ball, uniform_grid(512), eps, 14)
    for n in (0, 7, 14):
        assert len(max_separated_greedy(profile, n)) == 64


def test_greedy_warns_on_coarse_grid(rotation_system):
    ball = enumerate_ball(rotation_system, 1)
    profile = build_separation_profile(ball, uniform_grid(16), 0.02, 1)
    got = max_separated_greedy(profile, 1)
    assert got.grid_too_coarse


def test_eq1_ceiling_every_row(hyperbolic_bundle):
    curve = entropy_at_scale(hyperbolic_bundle["profile"])
    for n, s, ceiling in curve.rows:
        assert s <= ceiling


def _pairwise_separated_oracle(system, elements, pts, eps, subset):
    return all(
        is_separated(system, pts[i], pts[j], elements, eps)[0]
        for i, j in itertools.combinations(subset, 2)
    )


def test_greedy_le_exact_le_ceiling_tiny_instance(hyperbolic_bundle):
    # exhaustive subset oracle on a 12-point instance
    system = hyperbolic_bundle["system"]
    ball = enumerate_ball(system, 2)
    rng = np.random.default_rng(11)
    pts = np.sort(rng.random(12))
    eps = 0.12
    profile = build_separation_profile(ball, pts, eps, 2)
    greedy = max_separated_greedy(profile, 2)
    exact = max_separated_exact(profile, 2)
    best = 0
    for r in range(12, 0, -1):
        hit = False
        for subset in itertools.combinations(range(12), r):
            if _pairwise_separated_oracle(system, ball.elements, pts, eps, subset):
                hit = True
                break
        if hit:
            best = r
            break
    assert len(exact) == best
    assert len(greedy) <= len(exact)
    assert len(exact) <= (1.0 / eps) * len(ball.elements)


def test_exact_all_pairs_and_no_pairs():
    system = GeneratingSystem([("e", Rotation(0.0))])
    ball = enumerate_ball(system, 0)
    # spread points: all pairs separated, the whole grid comes back
    pts = np.array([0.0, 0.25, 0.5, 0.75])
    profile = build_separation_profile(ball, pts, 0.2, 0)
    assert len(max_separated_exact(profile, 0)) == 4
    # clustered points: nothing separated, a single point remains
    pts = np.array([0.0, 0.001, 0.002, 0.003])
    profile = build_separation_profile(ball, pts, 0.2, 0)
    assert len(max_separated_exact(profile, 0)) == 1


def test_exact_cap_refusal(hyperbolic_bundle):
    profile = hyperbolic_bundle["profile"]
    with pytest.raises(ExactOracleCapError, match="greedy"):
        max_separated_exact(profile, 2, cap=24)


def test_monotonicity_in_depth_and_scale(hyperbolic_bundle):
    ball = hyperbolic_bundle["ball"]
    grid = uniform_grid(80)
    prof_a = build_separation_profile(ball, grid, 0.05, 8)
    counts = [len(max_separated_greedy(prof_a, n)) for n in range(9)]
    assert counts == sorted(counts)
    prof_b = build_separation_profile(ball, grid, 0.1, 8)
    for n in range(9):
        assert len(max_separated_greedy(prof_b, n)) <= len(
            max_separated_greedy(prof_a, n))


def test_entropy_grid_compatibility(hyperbolic_bundle):
    ball = hyperbolic_bundle["ball"]
    profile = build_separation_profile(ball, uniform_grid(20), 0.1, 2)
    with pytest.raises(ValidationError, match="eps/4"):
        entropy_at_scale(profile)


def test_rotation_entropy_slope_flat():
    system = GeneratingSystem([("r", Rotation(ROT_ANGLE))])
    ball = enumerate_ball(system, 14)
    profile = build_separation_profile(ball, uniform_grid(400), 0.01, 14)
    curve = entropy_at_scale(profile)
    assert abs(curve.slope) <= 0.02
    assert curve.window == tail_window(14) == (7, 14)


def test_restriction_full_circle_identical(rotation_system):
    from circle_entropy.wandering import approximate_nonwandering

    ball = enumerate_ball(rotation_system, 8)
    profile = build_separation_profile(ball, uniform_grid(400), 0.01, 8)
    approx = approximate_nonwandering(ball, 6, 1e-3)
    assert approx.full_circle
    full = entropy_at_scale(profile)
    restricted = restricted_entropy(profile, approx)
    assert [r[:2] for r in full.rows] == [r[:2] for r in restricted.rows]


def test_restriction_two_fixed_points(hyperbolic_bundle):
    # only the two grid points on the fixed points survive the restriction
    restricted = restricted_entropy(hyperbolic_bundle["profile"],
                                    hyperbolic_bundle["approx"])
    assert restricted.restriction_size == 2
    assert all(s <= 2 for _, s, _ in restricted.rows)
    assert restricted.rows[-1][1] == 2


def test_restriction_monotone(hyperbolic_bundle):
    full = entropy_at_scale(hyperbolic_bundle["profile"])
    restricted = restricted_entropy(hyperbolic_bundle["profile"],
                                    hyperbolic_bundle["approx"])
    for (n, s_full, _), (_, s_om, _) in zip(full.rows, restricted.rows):
        assert s_om <= s_full


def test_empty_restriction_error(hyperbolic_bundle):
    from circle_entropy.wandering import NonWanderingApprox
    from circle_entropy.geometry import Arc

    tiny = NonWanderingApprox(arcs=(Arc(0.31111, 1e-5),), full_circle=False,
                              depth=1, resolution=1e-5, ball_ref="x")
    with pytest.raises(EmptyRestrictionError):
        restricted_entropy(hyperbolic_bundle["profile"], tiny)


def test_witnesses_cover_adjacent_pairs(hyperbolic_bundle):
    profile = hyperbolic_bundle["profile"]
    got = max_separated_greedy(profile, 10)
    m = len(got)
    assert len(got.witnesses) == m
    system = hyperbolic_bundle["system"]
    for k in range(m):
        w = got.witnesses[k]
        assert w is not None
        x, y = got.points[k], got.points[(k + 1) % m]
        assert circle_dist(system.apply_word(w.word, x),
                           system.apply_word(w.word, y)) >= profile.eps


def test_witness_is_first_in_canonical_order(hyperbolic_bundle):
    profile = hyperbolic_bundle["profile"]
    system, ball = hyperbolic_bundle["system"], hyperbolic_bundle["ball"]
    got = max_separated_greedy(profile, 10)
    x, y = got.points[0], got.points[1]
    _, first = is_separated(system, x, y, ball.elements_up_to(10), profile.eps)
    i = got.indices[0], got.indices[1]
    assert profile.witness(i[0], i[1]).word == first.word


def test_separation_propagation_on_witnesses(hyperbolic_bundle):
    # every recorded witness word admits a prefix whose image arc first
    # reaches length eps while staying at most a half circle
    system = hyperbolic_bundle["system"]
    profile = hyperbolic_bundle["profile"]
    got = max_separated_greedy(profile, 10)
    m = len(got)
    for k in range(m):
        x, y = got.points[k], got.points[(k + 1) % m]
        w = got.witnesses[k]
        r, length = propagation_prefix(system, w.word, x, y, profile.eps)
        assert r is not None and r <= len(w.word)
        assert profile.eps <= length <= 0.5


def test_inequality_report_parameter_mismatch(hyperbolic_bundle):
    from circle_entropy.errors import ConfigurationError

    ball = hyperbolic_bundle["ball"]
    prof_a = build_separation_profile(ball, uniform_grid(80), 0.05, 6)
    prof_b = build_separation_profile(ball, uniform_grid(40), 0.1, 6)
    with pytest.raises(ConfigurationError):
        check_restriction_inequality(entropy_at_scale(prof_a),
                                     entropy_at_scale(prof_b),
                                     lambda n: 1.0, form="A")


def test_inequality_trivial_for_identical_curves(hyperbolic_bundle):
    curve = entropy_at_scale(hyperbolic_bundle["profile"])
    rep = check_restriction_inequality(curve, curve, lambda n: 1.0, form="A")
    assert rep.all_pass
    assert "not a proof" in rep.caveat
