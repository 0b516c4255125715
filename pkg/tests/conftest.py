import numpy as np
import pytest

from jacobi_deficiency.coeffs import make_family


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def battery():
    """The six reference families used across the oracle and criteria tests."""
    return {
        "a": make_family("power", {"a": 0, "b": 1, "alpha": 1}),
        "b": make_family("power", {"a": 0, "b": 1, "alpha": 2}),
        "c": make_family("constant", {"a": 1, "b": 1}),
        "d": make_family("example1", {"p": 1, "m": 2}),
        "e": make_family("alternating_power", {"a": 1, "b": 1, "alpha": 2}),
        "f": make_family("power", {"a": 0, "b": 1, "alpha": 1.05}),
    }
