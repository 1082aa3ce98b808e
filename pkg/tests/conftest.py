import itertools

import numpy as np
import pytest

from rcc.channel import AuxInput, validate_channel


def flip_channel(p=0.25, ns=2):
    """Y = X, Z = X through a flip(p); the relay input S is ignored."""
    g = np.zeros((2, ns, 2, 2))
    for x, s, z in itertools.product(range(2), range(ns), range(2)):
        g[x, s, x, z] = 1 - p if z == x else p
    return validate_channel(g)


@pytest.fixture
def flip():
    return flip_channel()


@pytest.fixture
def uniform_input():
    return AuxInput(np.full((1, 2, 2), 0.25))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
