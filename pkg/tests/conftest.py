import sys
from pathlib import Path

import numpy as np
import pytest

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from core.geometry.grid import RadialGrid
from core.geometry.space import HyperbolicSpace
from core.params.parameter_set import derive
from core.propagator.wave_group import KleinGordonPropagator, MassParameter
from core.solver.data import bump_data
from core.solver.nonlinearity import Nonlinearity
from core.solver.picard import PicardSolver
from core.solver.time_grid import TimeGrid
from core.transform.spectral_grid import SpectralGrid
from core.transform.spherical_transform import SphericalTransform

SMALL_R_MAX = 10.0
SMALL_N_R = 256
SMALL_LAMBDA_MAX = 12.0
SMALL_T_MAX = 6.0


@pytest.fixture(scope="session")
def space3():
    return HyperbolicSpace(3)


@pytest.fixture(scope="session")
def radial3(space3):
    return RadialGrid.gauss_legendre(space3, SMALL_R_MAX, SMALL_N_R, 8)


@pytest.fixture(scope="session")
def transform3(space3, radial3):
    spectral = SpectralGrid.for_reach(space3, SMALL_LAMBDA_MAX, SMALL_R_MAX + SMALL_T_MAX, 8)
    return SphericalTransform.build(radial3, spectral)


@pytest.fixture(scope="session")
def propagator3(transform3):
    return KleinGordonPropagator(transform3, MassParameter.shifted(3))


@pytest.fixture(scope="session")
def params3():
    return derive(3, 2.7, 0.05)


@pytest.fixture(scope="session")
def time_grid3():
    return TimeGrid.graded(1.0, SMALL_T_MAX, core_points=12, tail_step=0.1, t_min=1e-2)


@pytest.fixture(scope="session")
def solver3(propagator3):
    return PicardSolver(propagator3, Nonlinearity(2.7))


@pytest.fixture(scope="session")
def small_data(radial3, solver3, params3, time_grid3):
    """Bump data scaled to E-norm 1e-2 of its free evolution."""
    shape = bump_data(radial3, 1.0)
    base = solver3.linear_norm(shape, params3, time_grid3)
    return shape.scaled(1e-2 / base)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
