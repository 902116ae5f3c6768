import numpy as np
import pytest

from bs_spectra.fourier import default_grid, make_grid
from bs_spectra.potential import DistributionalPotential, GaussianTerm


@pytest.fixture(scope="session")
def point_grid():
    """1024 nodes, fine near the origin; enough for point-mass spectra."""
    return default_grid(200.0, 64, 16)


@pytest.fixture(scope="session")
def smooth_grid():
    """Small uniform grid for smooth potentials and Gaussian test functions."""
    return make_grid(30.0, 32, 16)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def delta_well():
    return DistributionalPotential.delta(-2.0)


@pytest.fixture
def gaussian_well():
    return DistributionalPotential(terms=(GaussianTerm(-1.0, 1.0),))


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for n in sorted(verdicts):
            terminalreporter.write_line(verdicts[n])
