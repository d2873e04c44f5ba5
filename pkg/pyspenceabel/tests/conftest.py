"""Fixtures for pyspenceabel tests."""

import numpy as np
import pytest

from pyspenceabel.const import ZETA2
from pyspenceabel.dilog.orientation import OrientationCocycle
from pyspenceabel.quadrature import QuadConfig
from pyspenceabel.rhs import zero_rhs
from pyspenceabel.solver.flat import FlatIntegrand, flat_integrand
from pyspenceabel.solver.primitive import PerturbedSystem


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator."""
    return np.random.default_rng(20240229)


@pytest.fixture(scope="session")
def pipeline_cfg() -> QuadConfig:
    """Quadrature settings shared by the slow tests, so cached tables are reused."""
    return QuadConfig.pipeline()


@pytest.fixture(scope="session")
def orientation_cocycle() -> OrientationCocycle:
    """The orientation cocycle with the default scale."""
    return OrientationCocycle()


@pytest.fixture(scope="session")
def orientation_flat(orientation_cocycle: OrientationCocycle, pipeline_cfg: QuadConfig) -> FlatIntegrand:
    """F♭ of the orientation cocycle; tables are built on first use."""
    return flat_integrand(orientation_cocycle, pipeline_cfg)


@pytest.fixture(scope="session")
def zero_system() -> PerturbedSystem:
    """The classical system R = 0, C = ζ(2)."""
    return PerturbedSystem(zero_rhs(), ZETA2)
