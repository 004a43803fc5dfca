import numpy as np
import pytest

from stone_spectra import ObservableSpec, stone_cdf

ANTI_GRID = np.arange(-600, 601) * 0.05


@pytest.fixture(scope="session")
def anti_cdf():
    return stone_cdf(ObservableSpec.anticommutator(), ANTI_GRID)


@pytest.fixture(scope="session")
def osc_cdf():
    return stone_cdf(ObservableSpec.oscillator(), np.linspace(-1, 2, 61))
