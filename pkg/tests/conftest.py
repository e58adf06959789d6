"""Shared fixtures: canonical solution specs and sampling helpers."""

import numpy as np
import pytest

from heavenly_lift.funcspace import HoloFn, RealFn1
from heavenly_lift.jets import Point4
from heavenly_lift.sampling import STANDARD_BOX
from heavenly_lift.solutions import SolutionSpec

B_Z = HoloFn.polynomial([0.0, 1.0])
B_Z2 = HoloFn.polynomial([0.0, 0.0, 1.0])
B_Z3 = HoloFn.polynomial([0.0, 0.0, 0.0, 1.0])
B_NEG = HoloFn.polynomial([0.0, -1.0, -0.25])     # Re b' < 0 over the box
K_LIN = RealFn1.polynomial([0.0, 1.0])
R_SIN = RealFn1.sin()
R_COS = RealFn1.cos()
R_NEG = RealFn1.polynomial([0.0, 0.0, -0.25])     # r'' = -1/2 < 0 everywhere

ALPHA = 0.3
R0 = 0.2


@pytest.fixture(scope="session")
def sol1():
    return SolutionSpec.sol1(B_Z2, R_SIN)


@pytest.fixture(scope="session")
def sol2():
    return SolutionSpec.sol2(B_Z3, R_SIN)


@pytest.fixture(scope="session")
def sol3():
    return SolutionSpec.sol3(B_Z2, R_COS, K_LIN)


@pytest.fixture(scope="session")
def sol1_neg():
    """First family with definite-sign r'' (co-frame friendly)."""
    return SolutionSpec.sol1(B_Z2, R_NEG)


@pytest.fixture(scope="session")
def sol2_neg():
    return SolutionSpec.sol2(B_Z3, R_NEG)


@pytest.fixture(scope="session")
def sol1_k_positive():
    """First family keeping the swapped-tetrad argument positive over the box."""
    return SolutionSpec.sol1(HoloFn.polynomial([0.0, 0.0, -0.3]),
                             RealFn1.polynomial([0.0, 0.0, -1.0]))


@pytest.fixture(scope="session")
def special1():
    return SolutionSpec.special1(B_Z2, ALPHA, R0)


@pytest.fixture(scope="session")
def special2():
    return SolutionSpec.special2(B_Z2, ALPHA, R0)


@pytest.fixture(scope="session")
def special1_curv():
    return SolutionSpec.special1(B_Z, ALPHA, R0)


@pytest.fixture(scope="session")
def special2_curv():
    return SolutionSpec.special2(B_Z, ALPHA, R0)


@pytest.fixture(scope="session")
def special1_frame():
    return SolutionSpec.special1(B_NEG, ALPHA, R0)


@pytest.fixture(scope="session")
def special2_frame():
    # b = z keeps the swapped co-frame's scalar factor positive over the box
    # (4 Re(zq) + 2 Re z^2 > 0) while the curvature stays nonzero
    return SolutionSpec.special2(B_Z, ALPHA, R0)


@pytest.fixture(scope="session")
def const_b():
    """The invariance control: constant b, constant r."""
    return SolutionSpec.sol1(HoloFn.constant(0.4 + 0.1j), RealFn1.polynomial([0.7]))


def sample_points(n, seed=0):
    return STANDARD_BOX.points(n, seed=seed)


def random_points(n, seed=0):
    rng = np.random.default_rng(seed)
    return [Point4(complex(rng.uniform(0.6, 2.0), rng.uniform(-0.4, 0.4)),
                   complex(rng.uniform(0.6, 2.0), rng.uniform(-0.4, 0.4)))
            for _ in range(n)]
