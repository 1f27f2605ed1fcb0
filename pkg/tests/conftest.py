import numpy as np
import pytest

from cuebar.keys import keygen


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def key():
    return keygen(7)


@pytest.fixture
def other_key():
    return keygen(8)
