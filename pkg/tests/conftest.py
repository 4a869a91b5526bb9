import numpy as np
import pytest

from chainlab.core.config import Settings
from chainlab.schemas.field import ScalarField
from chainlab.schemas.space import GridDescriptor, MassRule, TwoSequenceDescriptor
from chainlab.services.space_service import SpaceService


def line_grid(n_intervals: int, mass_rule: MassRule = MassRule.UNIFORM):
    """n_intervals + 1 points on [0, 1]."""
    return SpaceService.generate_space(
        GridDescriptor(dim=1, side=n_intervals + 1, spacing=1.0 / n_intervals, mass_rule=mass_rule)
    )


def random_space(rng: np.random.Generator, n: int, zero_mass: bool = False):
    """Random points in the unit square; optionally one point with zero mass."""
    coords = rng.random((n, 2))
    mass = rng.uniform(0.5, 2.0, n)
    if zero_mass:
        mass[rng.integers(n)] = 0.0
    return SpaceService.from_coords(coords, mass)


@pytest.fixture
def settings():
    return Settings()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def unit_path():
    """Three points at 0, 1, 2 with unit masses."""
    return SpaceService.generate_space(GridDescriptor(dim=1, side=3, spacing=1.0, mass_rule=MassRule.UNIT))


@pytest.fixture
def grid11():
    return line_grid(10)


@pytest.fixture
def grid101():
    return line_grid(100)


@pytest.fixture
def two_sequence():
    return SpaceService.generate_space(TwoSequenceDescriptor(n_min=3, n_max=50))


@pytest.fixture
def two_sequence_u(two_sequence):
    return ScalarField.function([1.0 if two_sequence.label_of(i).startswith("x") else 0.0 for i in range(two_sequence.n)])
