import numpy as np
import pytest

from visualmetrics.ball_oracle import BallOracle
from visualmetrics.carnot import CCDistanceEstimator, CCOptions
from visualmetrics.domains import unit_ball


@pytest.fixture(scope="session")
def ball():
    return unit_ball(2)


@pytest.fixture(scope="session")
def oracle():
    return BallOracle(2)


@pytest.fixture(scope="session")
def estimator(ball):
    options = CCOptions(
        vertex_count=2000,
        refine_iterations=200,
        refine_k_cap=32,
    )
    return CCDistanceEstimator(ball, options)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def boundary_point(rng, n=2):
    z = rng.normal(size=n) + 1j * rng.normal(size=n)
    return z / np.linalg.norm(z)
