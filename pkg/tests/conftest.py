"""Shared fixtures: the bundled systems and their derived objects.

Everything heavy is session-scoped so the suite enumerates each ball once.
"""

import numpy as np
import pytest

from circle_entropy import (
    DomainCounter,
    GeneratingSystem,
    approximate_nonwandering,
    build_separation_profile,
    classify_all,
    enumerate_ball,
    gap_components,
    uniform_grid,
)
from circle_entropy.maps import Mobius, Rotation

ROT_ANGLE = 0.1669666666666667
LAMBDA_HYP = 2.0 ** 0.5
LAMBDA_SCH = 7.0 ** 0.5


def hyperbolic_map():
    return Mobius([[LAMBDA_HYP, 0.0], [0.0, 1.0 / LAMBDA_HYP]])


def schottky_maps():
    lam = LAMBDA_SCH
    a = Mobius([[lam, 0.0], [0.0, 1.0 / lam]])
    b = Mobius([[(lam + 1 / lam) / 2, (1 / lam - lam) / 2],
                [(1 / lam - lam) / 2, (lam + 1 / lam) / 2]])
    return a, b


@pytest.fixture(scope="session")
def rotation_system():
    return GeneratingSystem([("r", Rotation(ROT_ANGLE))])


@pytest.fixture(scope="session")
def hyperbolic_system():
    return GeneratingSystem([("g", hyperbolic_map())])


@pytest.fixture(scope="session")
def schottky_system():
    a, b = schottky_maps()
    return GeneratingSystem([("a", a), ("b", b)])


@pytest.fixture(scope="session")
def dihedral_system():
    # rotation by 1/2 conjugates the hyperbolic generator to its inverse,
    # so the two gaps of the non-wandering set get swapped
    return GeneratingSystem([("g", hyperbolic_map()),
                             ("s", Rotation(0.5), True)])


@pytest.fixture(scope="session")
def hyperbolic_bundle(hyperbolic_system):
    """Ball to depth 20, approximation, classified gaps, counter, profile."""
    system = hyperbolic_system
    ball = enumerate_ball(system, 20)
    approx = approximate_nonwandering(ball, 6, 1e-3)
    gaps = classify_all(gap_components(approx, 0.1), ball, 6,
                        10 * approx.resolution)
    counter = DomainCounter(system, gaps, tau_fix=10 * approx.resolution)
    profile = build_separation_profile(ball, uniform_grid(40), 0.1, 10)
    return {"system": system, "ball": ball, "approx": approx, "gaps": gaps,
            "counter": counter, "profile": profile, "eps": 0.1}


@pytest.fixture(scope="session")
def schottky_bundle(schottky_system):
    """Depth-6 ball (cheap) plus approximation and classified gaps."""
    system = schottky_system
    ball = enumerate_ball(system, 6)
    approx = approximate_nonwandering(ball, 4, 0.002)
    gaps = classify_all(gap_components(approx, 0.02), ball, 6,
                        10 * approx.resolution)
    counter = DomainCounter(system, gaps, tau_fix=10 * approx.resolution)
    return {"system": system, "ball": ball, "approx": approx, "gaps": gaps,
            "counter": counter, "eps": 0.02}


@pytest.fixture(scope="session")
def dihedral_bundle(dihedral_system):
    system = dihedral_system
    ball = enumerate_ball(system, 8)
    approx = approximate_nonwandering(ball, 6, 1e-3)
    gaps = classify_all(gap_components(approx, 0.1), ball, 6,
                        10 * approx.resolution)
    counter = DomainCounter(system, gaps, tau_fix=10 * approx.resolution)
    return {"system": system, "ball": ball, "approx": approx, "gaps": gaps,
            "counter": counter, "eps": 0.1}
