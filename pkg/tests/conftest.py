import numpy as np
import pytest

from app.field import Field3, Gaussian, Grid
from app.functionals import Params
from app.profiles import Ball, BallsProfile, GaussianProfile, ZeroProfile


@pytest.fixture(scope="session")
def grid32() -> Grid:
    return Grid(n=32, box_half_width=8.0)


@pytest.fixture(scope="session")
def grid64() -> Grid:
    return Grid(n=64, box_half_width=8.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def gaussian64(grid64) -> Field3:
    return Field3.from_generator(grid64, Gaussian(beta=1.0))


@pytest.fixture(scope="session")
def gaussian32(grid32) -> Field3:
    return Field3.from_generator(grid32, Gaussian(beta=1.0))


@pytest.fixture(scope="session")
def cubic() -> Params:
    return Params(omega=1.0, e=0.0, p=3.0)


@pytest.fixture(scope="session")
def coupled() -> Params:
    return Params(omega=1.0, e=0.3, p=3.0)


@pytest.fixture(scope="session")
def zero_rho() -> ZeroProfile:
    return ZeroProfile()


@pytest.fixture(scope="session")
def gaussian_rho() -> GaussianProfile:
    return GaussianProfile(epsilon=0.5, alpha=1.0)


@pytest.fixture(scope="session")
def unit_ball() -> Ball:
    return Ball(sigma=1.0, center=(0.0, 0.0, 0.0), radius=1.0)


@pytest.fixture(scope="session")
def ball_rho(unit_ball) -> BallsProfile:
    return BallsProfile(balls=(unit_ball,))
