import numpy as np
import pytest

from petzlab.ensemble import SplitMix64, random_davies, random_state
from petzlab.lindblad import davies_generator, qubit_davies_model
from petzlab.numcore import DensityMatrix


@pytest.fixture
def rng():
    return SplitMix64(20240611)


@pytest.fixture
def qubit_lb():
    """Qubit Davies generator with thermal state diag(0.3, 0.7) and rate 1."""
    return davies_generator(qubit_davies_model(0.3, 1.0))


@pytest.fixture
def qubit_rho0():
    return DensityMatrix(np.diag([0.8, 0.2]).astype(complex))


@pytest.fixture
def qutrit(rng):
    model, lb = random_davies(rng, 3)
    return model, lb, random_state(rng, 3, mix=0.2)


def max_abs(a):
    return float(np.max(np.abs(a)))
