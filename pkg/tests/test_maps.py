import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circle_entropy.errors import MapValidationError
from circle_entropy.geometry import Arc, circle_dist, uniform_grid
from circle_entropy.maps import (
    Mobius,
    PiecewiseLinear,
    Rotation,
    circle_log_derivative_variation,
    log_derivative_variation,
    map_from_spec,
)

TAU_ID = 1e-9


def sample_maps():
    return [
        Rotation(0.3819660112501051),
        Mobius([[2 ** 0.5, 0.0], [0.0, 2 ** -0.5]]),
        Mobius([[1.2, 0.3], [0.5, 1.0]]),
        PiecewiseLinear([(0.0, 0.0), (0.25, 0.5), (0.75, 0.875)]),
        PiecewiseLinear([(0.1, 0.6), (0.5, 0.9), (0.9, 0.35)]),
    ]


def test_rotation_examples():
    assert Rotation(0.25)(0.9) == pytest.approx(0.15, abs=1e-12)
    r0 = Rotation(0.0)
    for t in [0.0, 0.123, 0.999]:
        assert r0(t) == t


def test_mobius_fixed_points_from_eigenvectors():
    # oracle: eigenvectors of the matrix give the projective fixed points
    m = Mobius([[2 ** 0.5, 0.0], [0.0, 2 ** -0.5]])
    _, vecs = np.linalg.eig(m.m)
    for k in range(2):
        v0, v1 = vecs[0, k], vecs[1, k]
        if v1 < 0 or (v1 == 0 and v0 < 0):
            v0, v1 = -v0, -v1
        t = (math.atan2(v0, v1) / math.pi + 0.5) % 1.0
        assert circle_dist(m(t), t) < 1e-12


def test_mobius_fixed_points_generic():
    m = Mobius([[1.9, 0.4], [0.7, 0.9]])
    vals, vecs = np.linalg.eig(m.m)
    assert np.all(np.isreal(vals))
    for k in range(2):
        v0, v1 = float(vecs[0, k]), float(vecs[1, k])
        if v1 < 0 or (v1 == 0 and v0 < 0):
            v0, v1 = -v0, -v1
        t = (math.atan2(v0, v1) / math.pi + 0.5) % 1.0
        assert circle_dist(m(t), t) < 1e-12


def test_derivative_rotation_is_one():
    r = Rotation(0.37)
    assert r.derivative(0.2) == 1.0
    assert np.all(r.derivative(uniform_grid(16)) == 1.0)


def test_derivative_pl_slope():
    pl = PiecewiseLinear([(0.0, 0.0), (0.25, 0.5), (0.75, 0.875)])
    # segment [0, 0.25] -> [0, 0.5] has slope 2
    assert pl.derivative(0.1) == pytest.approx(2.0)
    val, one_sided = pl.derivative_info(0.25)
    assert one_sided
    val, one_sided = pl.derivative_info(0.1)
    assert not one_sided and val == pytest.approx(2.0)


def test_mobius_derivative_at_repelling_fixed_point():
    lam2 = 2.0
    m = Mobius([[lam2 ** 0.5, 0.0], [0.0, lam2 ** -0.5]])
    # repelling fixed point of x -> 2x sits at chart coordinate t = 1/2
    assert m.derivative(0.5) == pytest.approx(lam2, rel=1e-12)
    h = 1e-7
    fd = (m(0.5 + h) - m(0.5 - h)) / (2 * h)
    assert fd == pytest.approx(m.derivative(0.5), abs=1e-5)


@pytest.mark.parametrize("m", sample_maps())
def test_derivative_matches_finite_differences(m):
    h = 1e-7
    for t in [0.04, 0.31, 0.57, 0.83]:
        fd = (((m(t + h) - m(t - h)) + 0.5) % 1.0 - 0.5) / (2 * h)
        assert fd == pytest.approx(m.derivative(t), rel=1e-5, abs=1e-5)


@pytest.mark.parametrize("m", sample_maps())
def test_round_trip_within_tolerance(m):
    grid = uniform_grid(257)
    err = np.max(circle_dist(m.inverse()(m(grid)), grid))
    assert err <= TAU_ID
    err = np.max(circle_dist(m(m.inverse()(grid)), grid))
    assert err <= TAU_ID


@pytest.mark.parametrize("m", sample_maps())
def test_orientation_preserves_cyclic_order(m):
    # images of a positively ordered triple stay positively ordered
    grid = uniform_grid(31)
    for i in range(0, 29, 3):
        x, y, z = grid[i], grid[i + 1], grid[i + 2]
        fx, fy, fz = m(x), m(y), m(z)
        assert ((fy - fx) % 1.0) < ((fz - fx) % 1.0)


@pytest.mark.parametrize("m", sample_maps())
def test_evaluation_is_bijection_of_unit_interval(m):
    grid = uniform_grid(64)
    imgs = m(grid)
    assert np.all((0.0 <= imgs) & (imgs < 1.0))
    assert len(np.unique(np.round(imgs, 12))) == 64


def test_variation_rotation_zero():
    v = log_derivative_variation(Rotation(0.3), Arc(0.2, 0.4), samples=64)
    assert v.value == 0.0
    assert v.samples == 64


def test_variation_two_slope_pl():
    # slopes 2 then 1/2 across the sampled arc: variation is 2 log 2
    pl = PiecewiseLinear([(0.0, 0.0), (0.3, 0.6), (0.9, 0.9)])
    v = log_derivative_variation(pl, Arc(0.05, 0.5), samples=2048)
    assert v.value == pytest.approx(2 * math.log(2), abs=1e-12)


def test_variation_mobius_dense_grid_oracle():
    # refine the grid until the estimate is Cauchy, then compare at 1e5
    m = Mobius([[2.0 ** 0.5, 0.0], [0.0, 2.0 ** -0.5]])
    arc = Arc(0.1, 0.55)
    dense = log_derivative_variation(m, arc, samples=100_000).value
    prev = None
    for s in [2049, 4097, 8193, 16385]:
        cur = log_derivative_variation(m, arc, samples=s).value
        if prev is not None:
            assert abs(cur - prev) < 1e-4
        prev = cur
    assert log_derivative_variation(m, arc, samples=4096).value == pytest.approx(
        dense, abs=1e-4
    )


def test_variation_monotone_under_nested_refinement():
    m = Mobius([[1.4, 0.2], [0.3, 1.0]])
    arc = Arc(0.3, 0.3)
    vals = [log_derivative_variation(m, arc, samples=2 ** k + 1).value
            for k in range(3, 9)]
    for a, b in zip(vals, vals[1:]):
        assert b >= a - 1e-15


def test_variation_subadditive_under_composition():
    # var(log (f o g)' ) over a sampled grid of I is bounded by the g-part on
    # the same grid plus the f-part on the pushed-forward grid
    f = Mobius([[1.3, 0.4], [0.2, 1.1]])
    g = PiecewiseLinear([(0.0, 0.0), (0.3, 0.45), (0.7, 0.8)])
    arc = Arc(0.05, 0.5)
    xs = arc.sample(4096)
    comp = np.abs(np.diff(np.log(f.derivative(g(xs)) * g.derivative(xs)))).sum()
    part_g = np.abs(np.diff(np.log(g.derivative(xs)))).sum()
    part_f = np.abs(np.diff(np.log(f.derivative(g(xs))))).sum()
    assert comp <= part_g + part_f + 1e-12


def test_circle_variation_includes_wrap():
    m = Mobius([[2.0 ** 0.5, 0.0], [0.0, 2.0 ** -0.5]])
    v = circle_log_derivative_variation(m, samples=8192)
    # log-derivative runs from log(1/2) at t=0 up to log 2 at t=1/2 and back
    assert v.value == pytest.approx(4 * math.log(2), abs=1e-3)


def test_pl_validation_errors():
    with pytest.raises(MapValidationError):
        PiecewiseLinear([(0.3, 0.1), (0.2, 0.5)])  # t not increasing
    with pytest.raises(MapValidationError):
        PiecewiseLinear([(0.0, 0.0), (0.3, 0.6), (0.6, 0.3), (0.8, 0.9)])  # double wrap
    with pytest.raises(MapValidationError):
        Mobius([[1.0, 2.0], [0.5, 1.0]])  # determinant 0
    with pytest.raises(MapValidationError):
        Mobius([[0.0, 1.0], [1.0, 0.0]])  # orientation reversing


def test_pl_inverse_roundtrip_wrapping():
    pl = PiecewiseLinear([(0.1, 0.6), (0.5, 0.9), (0.9, 0.35)])
    grid = uniform_grid(101)
    assert np.max(circle_dist(pl.inverse()(pl(grid)), grid)) < 1e-12


def test_chain_rule_against_finite_differences():
    maps = sample_maps()
    word = [maps[1], maps[3], maps[2]]
    def apply_all(t):
        for m in word:
            t = m(t)
        return t
    for t in [0.12, 0.48, 0.91]:
        d = 1.0
        cur = t
        for m in word:
            d *= m.derivative(cur)
            cur = m(cur)
        h = 1e-7
        fd = (((apply_all(t + h) - apply_all(t - h)) + 0.5) % 1.0 - 0.5) / (2 * h)
        assert abs(fd - d) / d < 1e-6


def test_map_from_spec_roundtrip():
    from circle_entropy.maps import map_spec

    for m in sample_maps():
        spec = map_spec(m)
        m2 = map_from_spec(spec)
        grid = uniform_grid(32)
        assert np.max(circle_dist(m(grid), m2(grid))) < 1e-15
    with pytest.raises(MapValidationError):
        map_from_spec({"kind": "spiral"})
