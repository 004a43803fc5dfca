import math

import mpmath
import numpy as np
import pytest

from stone_spectra.config import DEFAULT_CONFIG, NumericsConfig
from stone_spectra.errors import DomainError, ExtrapolationError, NumericalError
from stone_spectra.resolvents import ObservableSpec
from stone_spectra.stone import (
    SpectralCDF,
    anticommutator_beta_density,
    anticommutator_cdf_closed,
    eig_cdf_oracle,
    matrix_cdf_arctan,
    stone_cdf,
    stone_cdf_matrix_exact,
)

HEIS_VACUA = [(1.0, 0.0, 0.0), tuple(np.ones(3) / math.sqrt(3)), (0.6, 0.8, 0.0)]


def density_oracle(lam):
    """Cauchy-mixture density summed by mpmath, independent of the Beta form."""
    lam = mpmath.mpf(lam)
    s = mpmath.nsum(
        lambda n: mpmath.rf(0.5, n) / mpmath.factorial(n) * (-1) ** n * (4 * n + 1) / ((4 * n + 1) ** 2 + lam ** 2),
        [0, mpmath.inf],
    )
    return float(mpmath.sqrt(2) / mpmath.pi * s)


class TestSpectralCDF:
    def test_invariants_ok(self):
        SpectralCDF([0, 1, 2], [0, 0.5, 1], [(1.0, 0.5)]).check_invariants()

    def test_decreasing_rejected(self):
        with pytest.raises(NumericalError):
            SpectralCDF([0, 1, 2], [0, 0.6, 0.5]).check_invariants()

    def test_slack(self):
        SpectralCDF([0, 1], [0.5, 0.5 - 5e-10]).check_invariants()

    def test_atom_mass_bounds(self):
        with pytest.raises(NumericalError):
            SpectralCDF([0, 1], [0, 1], [(0.0, 0.7), (1.0, 0.7)]).check_invariants()

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            SpectralCDF([0, 1], [0.0])

    def test_interp(self):
        c = SpectralCDF([0, 1], [0.2, 0.6])
        assert c(0.5) == pytest.approx(0.4)
        assert c(-1) == 0 and c(3) == 1


class TestMatrixExact:
    def test_far_right(self):
        assert stone_cdf_matrix_exact(ObservableSpec.heisenberg(), 1e6, 1e-3) == pytest.approx(1.0, abs=1e-6)

    def test_far_left(self):
        assert abs(stone_cdf_matrix_exact(ObservableSpec.heisenberg(), -5.0, 1e-4)) < 1e-4

    def test_middle_limit(self):
        spec = ObservableSpec.heisenberg()
        cdf = stone_cdf(spec, [0.5])
        assert cdf(0.5) == pytest.approx(2 / 3, abs=1e-6)

    @pytest.mark.parametrize("vac", HEIS_VACUA)
    def test_agrees_with_general_arctan(self, vac):
        spec = ObservableSpec.heisenberg(vac)
        lam = np.linspace(-4, 4, 33)
        for e in (1e-3, 0.1, 1.0):
            assert np.max(np.abs(stone_cdf_matrix_exact(spec, lam, e) - matrix_cdf_arctan(spec, lam, e))) < 1e-13

    def test_only_heisenberg(self):
        with pytest.raises(DomainError):
            stone_cdf_matrix_exact(ObservableSpec.finite(np.eye(3), [1, 0, 0]), 0.0, 0.1)


class TestEigOracle:
    def test_heisenberg(self):
        c = eig_cdf_oracle(ObservableSpec.heisenberg(), [-2, 0, 2, 3])
        locs = [a[0] for a in c.atoms]
        masses = [a[1] for a in c.atoms]
        assert locs == pytest.approx([-1, 2], abs=1e-12)
        assert masses == pytest.approx([2 / 3, 1 / 3], abs=1e-12)
        assert c.values == pytest.approx([0, 2 / 3, 1, 1], abs=1e-12)

    def test_identity(self):
        v = np.array([0.36, 0.48, 0.8])
        c = eig_cdf_oracle(ObservableSpec.finite(np.eye(3), v), [0, 1])
        assert c.atoms == [(pytest.approx(1.0), pytest.approx(1.0))]

    def test_diagonal(self):
        c = eig_cdf_oracle(ObservableSpec.finite(np.diag([1.0, 2.0, 3.0]), np.ones(3) / math.sqrt(3)), [0, 4])
        assert [a[0] for a in c.atoms] == pytest.approx([1, 2, 3])
        assert [a[1] for a in c.atoms] == pytest.approx([1 / 3] * 3)


class TestStoneFinite:
    @pytest.mark.parametrize("vac", HEIS_VACUA)
    def test_heisenberg_atoms(self, vac):
        spec = ObservableSpec.heisenberg(vac)
        x2 = sum(vac) ** 2
        expected = [(loc, m) for loc, m in ((-1.0, 1 - x2 / 3), (2.0, x2 / 3)) if m >= 1e-9]
        cdf = stone_cdf(spec, np.linspace(-3, 3, 61))
        assert len(cdf.atoms) == len(expected)
        for (loc, m), (eloc, em) in zip(cdf.atoms, expected):
            assert abs(loc - eloc) < 1e-3 and abs(m - em) < 1e-3
        lam = np.array([-2.0, 0.0, 1.0, 3.0])
        assert np.max(np.abs(cdf(lam) - stone_cdf_matrix_exact(spec, lam, 1e-14))) < 1e-6
        cdf.check_invariants()

    def test_single_atom_when_weight_vanishes(self):
        cdf = stone_cdf(ObservableSpec.heisenberg(tuple(np.ones(3) / math.sqrt(3))), np.linspace(-3, 3, 61))
        assert len(cdf.atoms) == 1
        assert cdf.atoms[0][0] == pytest.approx(2.0, abs=1e-3)
        assert cdf.atoms[0][1] == pytest.approx(1.0, abs=1e-3)

    def test_right_continuous(self):
        cdf = stone_cdf(ObservableSpec.heisenberg(), np.linspace(-3, 3, 61))
        assert cdf(-1.0) == pytest.approx(2 / 3, abs=1e-3)
        assert cdf(2.0) == pytest.approx(1.0, abs=1e-3)

    def test_random_matrices_match_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(6):
            n = int(rng.integers(2, 7))
            m = rng.normal(size=(n, n))
            m = (m + m.T) / 2
            v = rng.normal(size=n)
            v /= np.linalg.norm(v)
            spec = ObservableSpec.finite(m, v)
            vals = np.linalg.eigvalsh(m)
            grid = np.linspace(vals[0] - 1, vals[-1] + 1, 81)
            got = stone_cdf(spec, grid)
            ref = eig_cdf_oracle(spec, grid)
            far = np.min(np.abs(grid[:, None] - vals[None, :]), axis=1) > 0.05
            assert np.max(np.abs(got(grid[far]) - ref(grid[far]))) < 1e-3
            heavy = [a for a in ref.atoms if a[1] > DEFAULT_CONFIG.atom_jump_tol]
            assert len(got.atoms) == len(heavy)
            for (x, w), (ex, ew) in zip(got.atoms, heavy):
                assert abs(x - ex) < 1e-3 and abs(w - ew) < 1e-3

    def test_grid_validation(self):
        with pytest.raises(DomainError):
            stone_cdf(ObservableSpec.heisenberg(), [1.0, 0.0])
        with pytest.raises(DomainError):
            stone_cdf(ObservableSpec.heisenberg(), [])

    def test_deterministic_with_threads(self):
        spec = ObservableSpec.heisenberg((0.6, 0.8, 0.0))
        grid = np.linspace(-3, 3, 31)
        a = stone_cdf(spec, grid, DEFAULT_CONFIG.with_overrides(threads=1))
        b = stone_cdf(spec, grid, DEFAULT_CONFIG.with_overrides(threads=4))
        assert np.array_equal(a.values, b.values) and a.atoms == b.atoms

    def test_unstable_extrapolation_raises(self):
        # a coarse two-point schedule at huge eps cannot satisfy a tiny drift bound
        cfg = NumericsConfig(eps_schedule=(2.0, 1.5, 1.0, 0.5), cross_check_tol=1e-12)
        with pytest.raises(ExtrapolationError):
            stone_cdf(ObservableSpec.anticommutator(), [0.0, 1.0], cfg)


class TestStoneOscillator:
    def test_single_atom(self, osc_cdf):
        assert len(osc_cdf.atoms) == 1
        loc, mass = osc_cdf.atoms[0]
        assert abs(loc - 0.5) < 1e-3 and abs(mass - 1) < 1e-3

    def test_step(self, osc_cdf):
        g = osc_cdf.grid
        away = (g < 0.45) | (g > 0.55)
        assert np.max(np.abs(osc_cdf.values[away] - (g[away] >= 0.5))) < 1e-3
        osc_cdf.check_invariants()


class TestStoneAnticommutator:
    def test_invariants(self, anti_cdf):
        anti_cdf.check_invariants()
        assert anti_cdf.atoms == []
        assert anti_cdf.values[-1] >= 1 - 1e-3
        assert set(anti_cdf.error_budget) == {"extrapolation", "tail", "quadrature", "monotone_adjustment"}

    def test_cross_route(self, anti_cdf):
        lam = np.array([-3.0, -1.0, 0.0, 1.0, 3.0])
        assert np.max(np.abs(anti_cdf(lam) - anticommutator_cdf_closed(lam))) < 2e-3

    def test_median(self, anti_cdf):
        assert anti_cdf(0.0) == pytest.approx(0.5, abs=1e-4)


class TestAnticommutatorClosed:
    @pytest.mark.parametrize("t", [0.0, 0.7, -2.5, 6.0])
    def test_beta_density_vs_oracle(self, t):
        assert anticommutator_beta_density(t) == pytest.approx(density_oracle(t), abs=1e-12)

    def test_density_value_at_zero(self):
        assert anticommutator_beta_density(0.0) == pytest.approx(0.41731342083703665, abs=1e-13)

    def test_normalisation(self):
        assert anticommutator_cdf_closed(40.0) == pytest.approx(1.0, abs=1e-6)

    def test_median(self):
        assert anticommutator_cdf_closed(0.0) == pytest.approx(0.5, abs=1e-8)

    def test_vector_order(self):
        lam = np.array([1.0, -1.0, 0.0])
        out = anticommutator_cdf_closed(lam)
        assert out[1] < out[2] < out[0]
        assert out[0] + out[1] == pytest.approx(1.0, abs=1e-8)
