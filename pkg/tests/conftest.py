import numpy as np
import pytest


def narrow_core_weights():
    """Dense core in [-0.02, 0.02] (92% of mass) plus wide sparse tails.

    With n=4, ratio=1, p_start=0.04 the internal span is 0.04, so each of the
    8 internal intervals is 0.005 wide: finer than the Q1.7 step 2**-7 but
    coarser than the shifted step 2**-(8+5).
    """
    core = np.linspace(-0.02, 0.02, 921)
    tail = np.linspace(0.05, 0.6, 40)
    return np.concatenate([core, -tail, tail])


@pytest.fixture
def collision_weights():
    return narrow_core_weights()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
