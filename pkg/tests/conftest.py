import numpy as np
import pytest

from snappa.config import load_run_config


@pytest.fixture(scope="session")
def run_config():
    """Packaged default configuration (reference device constants)."""
    return load_run_config()


@pytest.fixture(scope="session")
def params(run_config):
    return run_config.params


@pytest.fixture(scope="session")
def stark_fit(run_config):
    return run_config.stark_fit


@pytest.fixture(scope="session")
def dims(run_config):
    return run_config.dims


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
