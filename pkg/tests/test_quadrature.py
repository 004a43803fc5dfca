import math

import numpy as np
import pytest
from scipy import special

from stone_spectra.errors import QuadratureError
from stone_spectra.quadrature import adaptive_panels, gauss_legendre_panels


def test_narrow_lorentzian_cells():
    e = 1e-3
    edges = [-5.0, 0.0, 0.3, 5.0]
    vals, err = adaptive_panels(lambda x: e / (x * x + e * e), edges, tol=1e-10, max_width=8 * e)
    exact = np.diff(np.arctan(np.array(edges) / e))
    assert np.max(np.abs(vals - exact)) < 1e-10
    assert err < 1e-9


def test_gaussian_complex():
    edges = np.linspace(-6, 6, 13)
    vals, _ = adaptive_panels(lambda x: np.exp(-x * x + 2j * x), edges, tol=1e-12)
    assert abs(vals.sum() - math.sqrt(math.pi) * math.exp(-1)) < 1e-12
    # per-cell values against erf differences of the real part
    re = [np.real(special.erf(b - 1j) - special.erf(a - 1j)) * math.sqrt(math.pi) / 2 * math.exp(-1) for a, b in zip(edges[:-1], edges[1:])]
    assert np.max(np.abs(vals.real - np.array(re))) < 1e-12


def test_empty_cells():
    vals, _ = adaptive_panels(np.cos, [0.0, 0.0, 1.0, 1.0], tol=1e-12)
    assert vals[0] == 0 and vals[2] == 0
    assert vals[1] == pytest.approx(math.sin(1.0), abs=1e-14)


def test_bad_edges():
    with pytest.raises(ValueError):
        adaptive_panels(np.cos, [1.0, 0.0])


def test_failure_reported():
    with pytest.raises(QuadratureError):
        adaptive_panels(lambda x: np.abs(x) ** -0.9, [0.0, 1.0], tol=1e-14, max_rounds=5)


def test_gauss_legendre_panels_polynomial():
    x, w = gauss_legendre_panels(-1.0, 3.0, 7, 10)
    assert np.sum(w * x ** 9) == pytest.approx((3.0 ** 10 - 1) / 10, rel=1e-14)
