import os

# flake8: noqa: E402

os.environ["CONFIG"] = os.path.abspath(
    os.path.join(os.path.dirname(os.path.dirname(__file__)), "tests/test.env")
)

import pytest

from app.gbtm import FitConfig
from app.models import TimeGrid
from tests.utils import constant_scenario


@pytest.fixture
def weekly_grid():
    """weeks 0, 2, ..., 16"""
    return TimeGrid.regular(0, 16, 2)


@pytest.fixture
def fit_config():
    return FitConfig(n_starts=3, max_iterations=500, rel_tol=1e-8, seed=11)


@pytest.fixture
def two_constant_groups():
    """means 2 and 18, noise 0.5, N=200, balanced"""
    return constant_scenario([2.0, 18.0], noise_sd=0.5, n=200, seed=3)


@pytest.fixture
def out_dir(tmp_path):
    path = tmp_path / "out"
    path.mkdir()
    return str(path)
