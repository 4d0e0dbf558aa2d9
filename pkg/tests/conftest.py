import numpy as np
import pytest

from spherefield import make_model_from_table, make_powerlaw_model


@pytest.fixture
def powerlaw_small():
    """Default-family model, small enough for fast Monte Carlo."""
    return make_powerlaw_model(16, 3, 1.0, 3.0, 2.0)


@pytest.fixture
def rank1_model():
    """Unit eigenvalue in the first coordinate at every degree."""
    table = np.zeros((17, 3))
    table[:, 0] = 1.0
    return make_model_from_table(table)


def rank1(lam: float, band_limit: int, dim: int = 1):
    table = np.full((band_limit + 1, dim), 0.0)
    table[:, 0] = lam
    return make_model_from_table(table)
