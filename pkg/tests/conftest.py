import math

import numpy as np
import pytest

from cmvlab import coefficients as C


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def make_periodic(rng):
    """Factory for random periodic sequences with values in a disk."""

    def _make(q: int, radius: float = 0.6) -> C.CoefficientSequence:
        vals = radius * rng.random(q) * np.exp(2j * math.pi * rng.random(q))
        return C.periodic_table_seq(vals)

    return _make
