import math

import mpmath
import numpy as np
import pytest

from stone_spectra.charfun import (
    ComplexGridFunction,
    SpectralMeasure,
    anticommutator_density,
    anticommutator_measure,
    anticommutator_tail_mass,
    cf_anticommutator_gaussian_route,
    cf_anticommutator_reference,
    cf_anticommutator_series,
    cf_from_measure,
    gaussian_double_integral,
    gaussian_double_integral_quadrature,
    measure_from_cdf,
)
from stone_spectra.config import SeriesControl
from stone_spectra.errors import DomainError, NumericalError, QuadratureError
from stone_spectra.resolvents import ObservableSpec
from stone_spectra.stone import stone_cdf

T_SET = np.array([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0])


def sqrt_sech(t):
    return float(mpmath.sqrt(mpmath.sech(2 * mpmath.mpf(t))))


def gaussian_oracle(a, b, g):
    """Iterated integral in mpmath: inner y integral in closed form, outer x by quadrature."""
    a, b, g = mpmath.mpc(a), mpmath.mpc(b), mpmath.mpc(g)
    inner = lambda x: mpmath.sqrt(mpmath.pi / -b) * mpmath.exp(a * x * x + (g * x) ** 2 / (4 * b))
    return complex(mpmath.quad(inner, [-mpmath.inf, 0, mpmath.inf]))


class TestGridFunction:
    def test_check_passes(self):
        ComplexGridFunction([-1, 0, 1], np.exp(1j * np.array([-1, 0, 1]))).check_characteristic()

    def test_check_modulus(self):
        with pytest.raises(NumericalError):
            ComplexGridFunction([0, 1], [1, 1.01]).check_characteristic()

    def test_check_origin(self):
        with pytest.raises(NumericalError):
            ComplexGridFunction([0, 1], [0.9, 0.5]).check_characteristic()


class TestMeasure:
    def test_negative_mass(self):
        with pytest.raises(DomainError):
            SpectralMeasure([(0.0, -0.1)])

    def test_mass_check(self):
        with pytest.raises(NumericalError):
            SpectralMeasure([(0.0, 0.5)]).check()

    def test_density_needs_radius(self):
        with pytest.raises(DomainError):
            SpectralMeasure([], lambda x: x, 0.0, 1.0)


class TestCfFromMeasure:
    def test_oscillator_atom(self):
        t = np.linspace(-4, 4, 81)
        phi = cf_from_measure(SpectralMeasure([(0.5, 1.0)]), t)
        assert phi.max_deviation(lambda t: np.exp(0.5j * t)) < 1e-15

    def test_bernoulli(self):
        x2 = 1.0
        t = np.linspace(-6, 6, 121)
        m = SpectralMeasure([(-1.0, 1 - x2 / 3), (2.0, x2 / 3)])
        ref = lambda t: (1 - x2 / 3) * np.exp(-1j * t) + x2 / 3 * np.exp(2j * t)
        assert cf_from_measure(m, t).max_deviation(ref) < 1e-15

    def test_gaussian_density(self):
        # standard normal density: cf exp(-t^2/2)
        m = SpectralMeasure([], lambda x: np.exp(-x * x / 2) / math.sqrt(2 * math.pi), 12.0, 1.0)
        t = np.linspace(-5, 5, 41)
        assert cf_from_measure(m, t).max_deviation(lambda t: np.exp(-t * t / 2)) < 1e-12

    def test_anticommutator_density_at_zero(self):
        phi = cf_from_measure(anticommutator_measure(), [0.0])
        assert abs(phi.values[0] - 1) < 1e-6


class TestAnticommutatorRoutes:
    def test_reference_values(self):
        assert cf_anticommutator_reference(0.0) == 1.0
        assert cf_anticommutator_reference(1.0) == pytest.approx(sqrt_sech(1), abs=1e-15)
        assert cf_anticommutator_reference(1.0) == pytest.approx(math.sqrt(2 / (math.e ** 2 + math.e ** -2)), abs=1e-15)
        assert cf_anticommutator_reference(-0.7) == cf_anticommutator_reference(0.7)

    def test_gaussian_route_origin(self):
        assert abs(cf_anticommutator_gaussian_route(0.0) - 1) < 1e-10

    def test_gaussian_route_half(self):
        assert abs(cf_anticommutator_gaussian_route(0.5) - sqrt_sech(0.5)) < 1e-8

    @pytest.mark.parametrize("t", [-3.0, -1.5, -0.2, 0.9, 2.5, 3.0])
    def test_gaussian_route_vs_oracle(self, t):
        assert abs(cf_anticommutator_gaussian_route(t) - sqrt_sech(t)) < 1e-8

    def test_gaussian_route_limit(self):
        with pytest.raises(QuadratureError):
            cf_anticommutator_gaussian_route(3.5)

    @pytest.mark.parametrize("t", [1.0, 0.01, 1e-4, 0.0, 4.0, 12.0])
    def test_series(self, t):
        assert cf_anticommutator_series(t) == pytest.approx(sqrt_sech(t), abs=1e-10)
        assert cf_anticommutator_series(-t) == cf_anticommutator_series(t)

    def test_series_relaxed_control(self):
        ctl = SeriesControl(rel_tol=1e-8, max_terms=500)
        assert abs(cf_anticommutator_series(0.01, ctl) - sqrt_sech(0.01)) < 1e-6

    def test_all_routes_agree(self):
        ref = np.array([sqrt_sech(t) for t in T_SET])
        gr = np.array([cf_anticommutator_gaussian_route(t) for t in T_SET])
        se = np.array([cf_anticommutator_series(t) for t in T_SET])
        assert np.max(np.abs(gr - ref)) < 1e-6
        assert np.max(np.abs(se - ref)) < 1e-8


class TestDensity:
    def test_even(self):
        x = np.linspace(0, 30, 301)
        assert np.max(np.abs(anticommutator_density(x) - anticommutator_density(-x))) < 1e-12

    def test_nonnegative(self):
        assert np.min(anticommutator_density(np.linspace(-200, 200, 4001))) >= 0

    @pytest.mark.parametrize("lam", [0.0, 0.3, 5.0, 40.0])
    def test_cauchy_mixture_oracle(self, lam):
        lam_m = mpmath.mpf(lam)
        ref = mpmath.sqrt(2) / mpmath.pi * mpmath.nsum(
            lambda n: mpmath.rf(0.5, n) / mpmath.factorial(n) * (-1) ** n * (4 * n + 1) / ((4 * n + 1) ** 2 + lam_m ** 2),
            [0, mpmath.inf],
        )
        assert anticommutator_density(lam) == pytest.approx(float(ref), rel=1e-12, abs=1e-15)

    def test_tail_mass_oracle(self):
        ref = 2 * mpmath.quad(
            lambda x: mpmath.sqrt(2) / mpmath.pi * mpmath.nsum(
                lambda n: mpmath.rf(0.5, n) / mpmath.factorial(n) * (-1) ** n * (4 * n + 1) / ((4 * n + 1) ** 2 + x ** 2),
                [0, mpmath.inf],
            ),
            [20, 100, mpmath.inf],
        )
        assert anticommutator_tail_mass(20.0) == pytest.approx(float(ref), abs=1e-10)

    def test_normalised(self):
        assert abs(anticommutator_measure().total_mass - 1) < 1e-6

    def test_fourier_at_one(self):
        phi = cf_from_measure(anticommutator_measure(radius=400.0), [1.0])
        assert abs(phi.values[0] - sqrt_sech(1)) < 1e-5


class TestStoneRoute:
    def test_anticommutator(self, anti_cdf):
        m = measure_from_cdf(anti_cdf)
        m.check(1e-3)
        phi = cf_from_measure(m, T_SET)
        assert phi.max_deviation(cf_anticommutator_reference) < 2e-3
        assert abs(cf_from_measure(m, [0.0]).values[0] - 1) < 1e-3

    def test_oscillator(self, osc_cdf):
        m = measure_from_cdf(osc_cdf)
        assert m.density is None
        t = np.linspace(-4, 4, 81)
        assert cf_from_measure(m, t).max_deviation(lambda t: np.exp(0.5j * t)) < 1e-3

    def test_heisenberg_bernoulli(self):
        rng = np.random.default_rng(21)
        t = np.linspace(-6, 6, 121)
        for _ in range(5):
            v = rng.normal(size=3)
            v /= np.linalg.norm(v)
            x2 = float(np.sum(v)) ** 2
            cdf = stone_cdf(ObservableSpec.heisenberg(tuple(v)), np.linspace(-3, 3, 61))
            phi = cf_from_measure(measure_from_cdf(cdf), t)
            ref = lambda t: (1 - x2 / 3) * np.exp(-1j * t) + x2 / 3 * np.exp(2j * t)
            assert phi.max_deviation(ref) < 1e-6


class TestGaussianIntegral:
    def test_product(self):
        assert gaussian_double_integral(-0.5, -0.5, 0) == pytest.approx(2 * math.pi, abs=1e-12)

    def test_gamma_one(self):
        # gamma^2 + 4 alpha beta = 2; the iterated integral is sqrt(2 pi) * sqrt(pi)
        assert gaussian_double_integral(-0.5, -0.5, 1) == pytest.approx(math.pi * math.sqrt(2), abs=1e-12)

    def test_use_site(self):
        g = math.e ** 2
        assert gaussian_double_integral(-0.5, -0.5, g) == pytest.approx(2 * math.pi / math.sqrt(math.e ** 4 + 1), abs=1e-12)

    @pytest.mark.parametrize(
        "a,b,g",
        [(-1, -2, 0.5), (-0.5 + 0.3j, -1 - 0.4j, 1.2), (-2 + 1j, -0.7, 0.3 + 0.2j), (-0.5, -0.5, 1j * 0.4)],
    )
    def test_vs_mpmath(self, a, b, g):
        assert gaussian_double_integral(a, b, g) == pytest.approx(gaussian_oracle(a, b, g), abs=1e-10)

    def test_quadrature_alone(self):
        assert gaussian_double_integral_quadrature(-1, -2, 0.5) == pytest.approx(gaussian_oracle(-1, -2, 0.5), abs=1e-10)

    def test_preconditions(self):
        with pytest.raises(DomainError):
            gaussian_double_integral(-1, 0.5, 0)
        with pytest.raises(DomainError):
            gaussian_double_integral(-0.1, -0.1, 1j)
