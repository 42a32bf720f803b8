import numpy as np
import pytest

from qutritsim.device import load_device


@pytest.fixture(scope="session")
def device():
    return load_device()


@pytest.fixture()
def rng():
    return np.random.default_rng(20260809)
