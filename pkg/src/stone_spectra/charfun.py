"""Characteristic functions of vacuum spectral measures.

``cf_from_measure`` turns a measure (atoms plus an optional density) into
``phi(t) = int e^{it lam} dmu(lam)``.  For ``XP + PX`` three analytic
routes to ``sqrt(sech 2t)`` are provided for cross-validation: a Gaussian
double integral, a Beta-type series and the density as a Cauchy mixture.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .config import DEFAULT_CONFIG, DEFAULT_SERIES, NumericsConfig, SeriesControl
from .errors import BranchError, DomainError, NumericalError, QuadratureError
from .quadrature import adaptive_panels, gauss_legendre_panels
from .specfun import alternating_sum, binomial_1f0, gauss_2f1, pochhammer
from .stone import SpectralCDF

SQRT2 = math.sqrt(2.0)


@dataclass
class ComplexGridFunction:
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.grid.shape != self.values.shape:
            raise DomainError("grid and values must have the same length")

    def max_deviation(self, reference) -> float:
        """``max |phi(t) - reference(t)|`` over the grid."""
        ref = np.asarray(reference(self.grid), dtype=complex)
        return float(np.max(np.abs(self.values - ref)))

    def check_characteristic(self, tol: float = 1e-9) -> None:
        """Raise if ``|phi| > 1`` or ``phi(0) != 1`` (when 0 is on the grid)."""
        if np.any(np.abs(self.values) > 1 + tol):
            raise NumericalError("characteristic function exceeds 1 in modulus")
        at0 = self.grid == 0
        if np.any(at0) and np.any(np.abs(self.values[at0] - 1) > tol):
            raise NumericalError("characteristic function is not 1 at t = 0")


@dataclass
class SpectralMeasure:
    """Atoms plus an absolutely continuous part supported in ``[-R, R]``.

    ``density_mass`` is the mass of the density over the whole line (it may
    include analytically summed tails beyond ``R``).  ``breakpoints`` lists
    points where a piecewise density is not smooth; quadrature panels are
    aligned with them.
    """

    atoms: list = field(default_factory=list)
    density: Callable | None = None
    decay_radius: float = 0.0
    density_mass: float = 0.0
    breakpoints: np.ndarray | None = None

    def __post_init__(self):
        self.atoms = [(float(x), float(m)) for x, m in self.atoms]
        if any(m <= 0 for _, m in self.atoms):
            raise DomainError("atom masses must be positive")
        if self.density is not None and not self.decay_radius > 0:
            raise DomainError("a density needs a positive decay_radius")

    @property
    def total_mass(self) -> float:
        return float(sum(m for _, m in self.atoms)) + (self.density_mass if self.density is not None else 0.0)

    def check(self, tol: float = 1e-6) -> None:
        if abs(self.total_mass - 1.0) > tol:
            raise NumericalError(f"measure has total mass {self.total_mass:.9g}, expected 1")
        if self.density is not None:
            x = np.linspace(-self.decay_radius, self.decay_radius, 2001)
            if np.min(self.density(x)) < -1e-12:
                raise NumericalError("density is negative")


def measure_from_cdf(cdf: SpectralCDF, min_density_mass: float = 1e-6) -> SpectralMeasure:
    """Split a sampled CDF into its atoms and a monotone-spline density.

    Minor atoms (resolved point masses below the reporting threshold) are
    kept as atoms rather than smeared into the density.

    The continuous part ``F - sum(atoms)`` is interpolated with a monotone
    cubic (PCHIP) and differentiated; a continuous part lighter than
    ``min_density_mass`` is treated as numerical noise and dropped.
    """
    grid, values = cdf.grid, cdf.values
    atoms = sorted(cdf.atoms + cdf.minor_atoms)
    cont = values.copy()
    for loc, mass in atoms:
        cont -= mass * (grid >= loc - 1e-9 * max(1.0, abs(loc)))
    cont = np.maximum.accumulate(cont)
    d_mass = float(cont[-1] - cont[0])
    if d_mass < min_density_mass or grid.size < 3:
        return SpectralMeasure(atoms)
    deriv = PchipInterpolator(grid, cont).derivative()
    lo, hi = float(grid[0]), float(grid[-1])

    def density(x):
        x = np.asarray(x, dtype=float)
        inside = (x >= lo) & (x <= hi)
        return np.where(inside, np.maximum(deriv(np.clip(x, lo, hi)), 0.0), 0.0)

    radius = max(abs(lo), abs(hi))
    return SpectralMeasure(atoms, density, radius, d_mass, breakpoints=grid.copy())


def cf_from_measure(m: SpectralMeasure, t_grid, cfg: NumericsConfig = DEFAULT_CONFIG) -> ComplexGridFunction:
    """``phi(t) = sum_j m_j e^{i t x_j} + int e^{i t lam} f(lam) d lam``.

    The density integral uses composite Gauss-Legendre panels no wider than
    ``min(1, pi/(4|t|))``, shared by all t on the grid and aligned with the
    measure's breakpoints.
    """
    t = np.asarray(t_grid, dtype=float).ravel()
    phi = np.zeros(t.shape, dtype=complex)
    for loc, mass in m.atoms:
        phi += mass * np.exp(1j * t * loc)
    if m.density is not None and t.size:
        r = m.decay_radius
        t_max = float(np.max(np.abs(t)))
        width = min(1.0, math.pi / (4 * t_max)) if t_max > 0 else 1.0
        edges = np.array([-r, r]) if m.breakpoints is None else np.unique(np.clip(np.concatenate([[-r, r], m.breakpoints]), -r, r))
        xs, ws = [], []
        for a, b in zip(edges[:-1], edges[1:]):
            x_ab, w_ab = gauss_legendre_panels(a, b, int(math.ceil((b - a) / width)), 20)
            xs.append(x_ab)
            ws.append(w_ab)
        x, w = np.concatenate(xs), np.concatenate(ws)
        fw = w * m.density(x)
        # outer product is fine at desk scale (t grid ~ 10^2, nodes ~ 10^4)
        phi += np.exp(1j * np.outer(t, x)) @ fw
    return ComplexGridFunction(t, phi)


# --------------------------------------------------------------------------
# XP + PX
# --------------------------------------------------------------------------

def cf_anticommutator_reference(t):
    """``sqrt(sech 2t)``."""
    t = np.asarray(t, dtype=float)
    out = np.sqrt(1.0 / np.cosh(2.0 * t))
    return float(out) if out.ndim == 0 else out


# trapezoid calibration: error ~ exp(-N asinh(1/c) / 2) for N angles
_GAUSS_ROUTE_MAX_T = 3.0
_GAUSS_ROUTE_DIGITS = 36.0


def cf_anticommutator_gaussian_route(t: float, cfg: NumericsConfig = DEFAULT_CONFIG) -> complex:
    """``(e^t/(pi sqrt2)) int int exp(-(x^2+y^2)/2 + i x y e^{2t}) dx dy`` by quadrature.

    In polar coordinates the radial integral is elementary,
    ``int_0^inf r exp(-r^2 (1 - i c sin 2phi)/2) dr = 1/(1 - i c sin 2phi)``
    with ``c = e^{2t}``, and the remaining periodic angular integral is
    done by the trapezoid rule, which converges geometrically.  The node
    count is calibrated for ``|t| <= 3``.
    """
    t = float(t)
    if abs(t) > _GAUSS_ROUTE_MAX_T:
        raise QuadratureError(f"gaussian route is calibrated for |t| <= {_GAUSS_ROUTE_MAX_T}, got t={t}")
    c = math.exp(2.0 * t)
    # poles of the angular integrand sit asinh(1/c)/2 off the real axis
    n = int(math.ceil(2.0 * _GAUSS_ROUTE_DIGITS / math.asinh(1.0 / c)))
    n = max(64, n + (n % 2))
    phi = np.arange(n) * (2.0 * math.pi / n)
    angular = (2.0 * math.pi / n) * np.sum(1.0 / (1.0 - 1j * c * np.sin(2.0 * phi)))
    return complex(math.exp(t) / (math.pi * SQRT2) * angular)


def cf_anticommutator_series(t: float, ctl: SeriesControl = DEFAULT_SERIES) -> float:
    """``sqrt2 * sum_n (1/2)_n (-1)^n e^{-(4n+1)|t|} / n!``.

    Written as ``sqrt2 e^{-|t|} 1F0(1/2;; -e^{-4|t|})``; near ``t = 0`` the
    argument approaches -1 and the alternating series is accelerated.
    """
    a = abs(float(t))
    return float((SQRT2 * math.exp(-a) * binomial_1f0(0.5, -math.exp(-4.0 * a), ctl)).real)


def anticommutator_density(lam, ctl: SeriesControl = DEFAULT_SERIES):
    """Vacuum spectral density of ``XP + PX`` as a Cauchy mixture.

    ``f(lam) = (sqrt2/pi) sum_n (1/2)_n (-1)^n (4n+1) / (n! ((4n+1)^2 + lam^2))``.
    The sum is the real part of ``sum_n (1/2)_n (-1)^n / (n! (4n+1+i lam))``,
    i.e. of ``2F1(1/2, w; w+1; -1) / (1 + i lam)`` with ``w = (1 + i lam)/4``.
    """
    lam = np.asarray(lam, dtype=float)
    w = (1.0 + 1j * lam) / 4.0
    series = np.asarray(gauss_2f1(0.5, w, w + 1.0, -1.0, ctl)) / (1.0 + 1j * lam)
    f = SQRT2 / math.pi * series.real
    if np.any(f < -1e-10):
        raise NumericalError(f"density series went negative ({np.min(f):.3g})")
    f = np.maximum(f, 0.0)
    return float(f) if f.ndim == 0 else f


def anticommutator_tail_mass(radius: float, ctl: SeriesControl = DEFAULT_SERIES) -> float:
    """Density mass on ``|lam| > radius``, summed term by term from arctan antiderivatives.

    Each Cauchy term contributes ``(2 sqrt2/pi) c_n (-1)^n atan((4n+1)/radius)``.
    """
    n = np.arange(56)
    c = np.array([float(pochhammer(0.5, k)) / math.factorial(k) for k in n])
    return float(2 * SQRT2 / math.pi * alternating_sum(c * np.arctan((4 * n + 1) / float(radius))))


def anticommutator_measure(radius: float = 50.0, cfg: NumericsConfig = DEFAULT_CONFIG) -> SpectralMeasure:
    """The analytic XP + PX vacuum measure (density only)."""
    ctl = cfg.series
    inner, _ = adaptive_panels(lambda x: anticommutator_density(x, ctl), [-radius, radius], tol=cfg.quad_tol, max_width=1.0)
    mass = float(inner[0]) + anticommutator_tail_mass(radius, ctl)
    return SpectralMeasure([], lambda x: anticommutator_density(x, ctl), radius, mass)


# --------------------------------------------------------------------------
# Gaussian integral formula
# --------------------------------------------------------------------------

def gaussian_double_integral(alpha, beta, gamma, cfg: NumericsConfig = DEFAULT_CONFIG, check: bool = True) -> complex:
    """``int int exp(alpha x^2 + beta y^2 + i gamma x y) dx dy = 2 pi / sqrt(gamma^2 + 4 alpha beta)``.

    The square root is continued from ``gamma = 0`` along ``s gamma``,
    ``s`` in [0, 1], starting at ``2 sqrt(-alpha) sqrt(-beta)``.  With
    ``check`` the result is compared with iterated Gauss-Legendre
    quadrature and must agree to 1e-7.
    """
    a, b, g = complex(alpha), complex(beta), complex(gamma)
    if not b.real < 0:
        raise DomainError("gaussian_double_integral needs Re beta < 0")
    outer_rate = a + g * g / (4.0 * b)
    if not outer_rate.real < 0:
        raise DomainError("gaussian_double_integral needs Re(4 alpha + gamma^2/beta) < 0")
    root = _continued_root(a, b, g)
    # iterated Gaussian integrals give the same root as a product of principal roots
    iterated = 2.0 * cmath.sqrt(-b) * cmath.sqrt(-outer_rate)
    if abs(iterated - root) > 1e-10 * max(1.0, abs(root)):
        raise BranchError(f"square-root continuation ended on {root}, iterated form gives {iterated}")
    value = 2.0 * math.pi / root
    if check:
        direct = gaussian_double_integral_quadrature(a, b, g)
        if abs(direct - value) > 1e-7 * max(1.0, abs(value)):
            raise QuadratureError(f"closed form {value} vs quadrature {direct}")
    return complex(value)


def _continued_root(a, b, g, steps=2000):
    root = 2.0 * cmath.sqrt(-a) * cmath.sqrt(-b)
    for s in np.linspace(0.0, 1.0, steps + 1)[1:]:
        cand = cmath.sqrt(s * s * g * g + 4.0 * a * b)
        if abs(cand + root) < abs(cand - root):
            cand = -cand
        if abs(cand - root) > 0.5 * max(abs(cand), abs(root)) and abs(cand) > 1e-12:
            raise BranchError("square-root continuation jumped; the path passes near a branch point")
        root = cand
    return root


def gaussian_double_integral_quadrature(alpha, beta, gamma, order=20) -> complex:
    """Iterated composite Gauss-Legendre evaluation (y inner, x outer)."""
    a, b, g = complex(alpha), complex(beta), complex(gamma)
    outer_rate = a + g * g / (4.0 * b)
    x_rad = math.sqrt(40.0 / -outer_rate.real)
    y_rad = math.sqrt(40.0 / -b.real)
    # |integrand| in y peaks at y* = Im(gamma) x / (2 Re beta)
    shift = g.imag / (2.0 * b.real)
    y_span = y_rad + abs(shift) * x_rad
    osc_y = abs(g.real) * x_rad + abs(b.imag) * y_span
    n_y = max(8, int(math.ceil(2 * y_span * max(osc_y, 1.0) / 6.0)), int(math.ceil(2 * y_span / (0.5 * y_rad))))
    osc_x = abs(g.real) * y_span + abs(a.imag) * x_rad
    n_x = max(8, int(math.ceil(2 * x_rad * max(osc_x, 1.0) / 6.0)), int(math.ceil(2 * x_rad / (0.2 * x_rad))))
    x, wx = gauss_legendre_panels(-x_rad, x_rad, n_x, order)
    y, wy = gauss_legendre_panels(-y_span, y_span, n_y, order)
    total = 0.0j
    # chunk the outer variable to bound memory
    for i in range(0, x.size, 256):
        xs = x[i:i + 256, None]
        kern = np.exp(a * xs * xs + b * y[None, :] ** 2 + 1j * g * xs * y[None, :])
        total += np.sum(wx[i:i + 256] * (kern @ wy))
    return complex(total)
