import time

import numpy as np
import pytest

from ziqsi.curve import fit_ziqsi
from ziqsi.baselines import fit_ziq_linear
from ziqsi.simulation import generate_dataset

SIM_SEED = 20260811


@pytest.fixture(scope="session")
def sim_data():
    """One realistic dataset: n=500, heavy zero inflation, overdispersed."""
    return generate_dataset(500, SIM_SEED, replicate=0)


@pytest.fixture(scope="session")
def fit_timing():
    return {}


@pytest.fixture(scope="session")
def ziqsi_model(sim_data, fit_timing):
    """Full 99-level fit used across test modules; wall time recorded for
    the fit-time acceptance check."""
    X, y = sim_data
    start = time.perf_counter()
    model = fit_ziqsi(X, y)
    fit_timing["ziqsi_500"] = time.perf_counter() - start
    return model


@pytest.fixture(scope="session")
def ziq_model(sim_data):
    X, y = sim_data
    return fit_ziq_linear(X, y)


@pytest.fixture(scope="session")
def small_model():
    """Cheap coarse-grid fit for plumbing tests."""
    X, y = generate_dataset(150, SIM_SEED, replicate=5)
    return fit_ziqsi(X, y, grid_levels=np.arange(0.1, 1.0, 0.1))
