"""Resolvent kernels and vacuum resolvent pairings.

Three observables are supported: a finite real symmetric matrix with a unit
vacuum vector, the anti-commutator ``XP + PX`` and the oscillator
Hamiltonian ``(X^2 + P^2)/2``.  For the last two the vacuum is the Gaussian
``pi^{-1/4} exp(-x^2/2)`` and ``R(z; T) = (z - T)^{-1}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np
from scipy import integrate

from .config import DEFAULT_CONFIG, NumericsConfig
from .errors import (
    DomainError,
    PoleError,
    QuadratureError,
    RouteDisagreementError,
    SingularityError,
)
from .quadrature import gauss_legendre_panels
from .specfun import gauss_2f1, kummer_1f1

SQRT2 = math.sqrt(2.0)
_PI_QUARTER = math.pi ** -0.25


class ObservableKind(str, Enum):
    FINITE_MATRIX = "FiniteMatrix"
    ANTICOMMUTATOR = "AntiCommutator"
    OSCILLATOR = "OscillatorHamiltonian"


HEISENBERG = np.array([[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]])


@dataclass(frozen=True, eq=False)
class ObservableSpec:
    """Which self-adjoint operator is studied, and in which vacuum.

    Only ``FINITE_MATRIX`` carries data; the two unbounded observables act on
    L^2(R) with the Gaussian vacuum implied.
    """

    kind: ObservableKind
    matrix: np.ndarray | None = None
    vacuum: np.ndarray | None = None
    name: str | None = None

    def __post_init__(self):
        kind = ObservableKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is not ObservableKind.FINITE_MATRIX:
            if self.matrix is not None or self.vacuum is not None:
                raise DomainError(f"{kind.value} takes no matrix or vacuum")
            return
        if self.matrix is None or self.vacuum is None:
            raise DomainError("FiniteMatrix needs both matrix and vacuum")
        h = np.array(self.matrix, dtype=float)
        v = np.array(self.vacuum, dtype=float)
        if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] == 0:
            raise DomainError("matrix must be square")
        if v.shape != (h.shape[0],):
            raise DomainError("vacuum length must match the matrix size")
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(v))):
            raise DomainError("matrix and vacuum must be finite")
        if np.max(np.abs(h - h.T)) > 1e-12:
            raise DomainError("matrix is not symmetric to 1e-12")
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise DomainError("vacuum is not a unit vector to 1e-12")
        h.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "matrix", h)
        object.__setattr__(self, "vacuum", v)

    @classmethod
    def anticommutator(cls) -> ObservableSpec:
        return cls(ObservableKind.ANTICOMMUTATOR, name="anticommutator")

    @classmethod
    def oscillator(cls) -> ObservableSpec:
        return cls(ObservableKind.OSCILLATOR, name="oscillator")

    @classmethod
    def finite(cls, matrix, vacuum, name: str | None = "matrix") -> ObservableSpec:
        return cls(ObservableKind.FINITE_MATRIX, np.asarray(matrix), np.asarray(vacuum), name)

    @classmethod
    def heisenberg(cls, vacuum=(1.0, 0.0, 0.0)) -> ObservableSpec:
        """The 3x3 all-ones-off-diagonal observable (eigenvalues 2 and -1, -1)."""
        return cls.finite(HEISENBERG, vacuum, name="heisenberg")

    @property
    def is_finite(self) -> bool:
        return self.kind is ObservableKind.FINITE_MATRIX

    def describe(self) -> dict:
        out = {"kind": self.kind.value, "name": self.name}
        if self.is_finite:
            out["matrix"] = self.matrix.tolist()
            out["vacuum"] = self.vacuum.tolist()
        return out


@dataclass(frozen=True)
class TestFunction:
    """A rapidly decaying function on the line.

    ``eval`` must accept numpy arrays.  ``deriv``/``deriv2`` are optional
    exact derivatives; numerical differentiation is used when absent.
    """

    __test__ = False  # not a pytest class

    eval: Callable
    decay_radius: float
    deriv: Callable | None = None
    deriv2: Callable | None = None

    def __post_init__(self):
        if not self.decay_radius > 0:
            raise DomainError("decay_radius must be positive")

    def __call__(self, x):
        return self.eval(x)

    def d1(self, x, h=1e-3):
        if self.deriv is not None:
            return self.deriv(x)
        f = self.eval
        return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)

    def d2(self, x, h=1e-3):
        if self.deriv2 is not None:
            return self.deriv2(x)
        f = self.eval
        return (-f(x - 2 * h) + 16 * f(x - h) - 30 * f(x) + 16 * f(x + h) - f(x + 2 * h)) / (12 * h * h)


def _phi(x):
    return _PI_QUARTER * np.exp(-0.5 * np.square(x))


# |Phi(x)| < 1e-16 for |x| > 8.6
VACUUM = TestFunction(
    eval=_phi,
    decay_radius=8.6,
    deriv=lambda x: -x * _phi(x),
    deriv2=lambda x: (np.square(x) - 1.0) * _phi(x),
)


@dataclass(frozen=True)
class WeberPair:
    """Even/odd solutions of ``M'' - (z^2/4 - a) M = 0`` with ``W(M1, M2) = 1``."""

    a: complex
    m1: Callable
    m2: Callable

    def wronskian(self, z, h=1e-5):
        """``M1 M2' - M1' M2`` with central differences."""
        d1 = (self.m1(z + h) - self.m1(z - h)) / (2 * h)
        d2 = (self.m2(z + h) - self.m2(z - h)) / (2 * h)
        return self.m1(z) * d2 - d1 * self.m2(z)


def weber_pair(a, cfg: NumericsConfig = DEFAULT_CONFIG) -> WeberPair:
    a = complex(a)
    ctl = cfg.series
    # 1F1 here runs up to z = w^2/2 ~ 75; allow the longer series this needs
    if ctl.max_terms < 1000:
        from dataclasses import replace

        ctl = replace(ctl, max_terms=1000)

    def m1(z):
        z = np.asarray(z, dtype=float)
        return np.exp(-0.25 * z * z) * kummer_1f1(-0.5 * a + 0.25, 0.5, 0.5 * z * z, ctl)

    def m2(z):
        z = np.asarray(z, dtype=float)
        return z * np.exp(-0.25 * z * z) * kummer_1f1(-0.5 * a + 0.75, 1.5, 0.5 * z * z, ctl)

    return WeberPair(a, m1, m2)


# --------------------------------------------------------------------------
# XP + PX
# --------------------------------------------------------------------------

def resolvent_anticommutator(a, g: TestFunction, s: float, cfg: NumericsConfig = DEFAULT_CONFIG) -> complex:
    """``R(a; XP+PX) g`` at the point ``s`` for ``Im a > -1``.

    For ``s > 0`` this is ``(i/2) s^{(ia-1)/2} int_s^inf w^{(-ia-1)/2} g(w) dw``;
    ``s < 0`` uses the mirrored integral over ``(-inf, s]`` and ``s = 0``
    gives ``g(0)/(a+i)``.  Powers of positive reals use the real logarithm.
    """
    a = complex(a)
    if not a.imag > -1:
        raise DomainError("resolvent_anticommutator needs Im a > -1")
    s = float(s)
    if s == 0.0:
        return complex(g(0.0)) / (a + 1j)
    p = (1j * a - 1.0) / 2.0
    q = (-1j * a - 1.0) / 2.0
    if s > 0:
        h = g.eval
    else:
        def h(u):
            return g.eval(-u)
    r = abs(s)
    radius = max(cfg.decay_radius, g.decay_radius)
    integral = _power_weighted_tail(h, q, r, radius, cfg.quad_tol)
    return 0.5j * complex(np.exp(p * math.log(r))) * integral


def _power_weighted_tail(h, q, r, radius, tol):
    """``int_r^radius w^q h(w) dw``; the part below 1 runs in ``log w``."""
    if r >= radius:
        return 0.0j
    total = 0.0j
    if r < 1.0:
        def in_log(u):
            w = math.exp(u)
            return complex(np.exp((q + 1.0) * u)) * complex(h(w))

        total += _cquad(in_log, math.log(r), min(0.0, math.log(radius)), tol)
    lo = max(r, 1.0)
    if lo < radius:
        total += _cquad(lambda w: complex(np.exp(q * math.log(w))) * complex(h(w)), lo, radius, tol)
    return total


def _cquad(f, a, b, tol, limit=400):
    out = 0.0j
    for part, unit in ((lambda x: f(x).real, 1.0), (lambda x: f(x).imag, 1.0j)):
        res = integrate.quad(part, a, b, epsabs=0.25 * tol, epsrel=1e-12, limit=limit, full_output=1)
        if len(res) > 3 and res[1] > tol:
            raise QuadratureError(f"quadrature on [{a}, {b}] failed: {res[3].splitlines()[0]}")
        out += unit * res[0]
    return out


def vacuum_resolvent_anticommutator(z, cfg: NumericsConfig = DEFAULT_CONFIG, check: bool = True):
    """``<Phi, R(z; XP+PX) Phi>`` for non-real ``z``.

    Returns the hypergeometric closed form.  With ``check=True`` the value
    is also computed by double quadrature of the resolvent kernel against
    the vacuum and the two must agree to ``cfg.cross_check_tol``.
    """
    zs = np.asarray(z, dtype=complex)
    if np.any(zs.imag == 0):
        raise DomainError("the resolvent pairing needs Im z != 0")
    closed = _anticommutator_pairing_closed(zs, cfg)
    if check:
        for zi, ci in zip(np.atleast_1d(zs), np.atleast_1d(closed)):
            quad = anticommutator_pairing_quadrature(complex(zi), cfg)
            if abs(quad - ci) > cfg.cross_check_tol * max(1.0, abs(ci)):
                raise RouteDisagreementError(
                    f"pairing at z={complex(zi)}: closed form {complex(ci)} vs quadrature {quad}"
                )
    return complex(closed) if closed.ndim == 0 else closed


def _anticommutator_pairing_closed(z, cfg):
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    lower = z.imag < 0
    if np.any(lower):
        zl = z[lower]
        al = (1.0 + 1j * zl) / 4.0
        out[lower] = 1j * SQRT2 / (1.0 + 1j * zl) * gauss_2f1(0.5, al, al + 1.0, -1.0, cfg.series)
    if np.any(~lower):
        zu = z[~lower]
        be = (1.0 - 1j * zu) / 4.0
        out[~lower] = -1j * SQRT2 / (1.0 - 1j * zu) * gauss_2f1(0.5, be, be + 1.0, -1.0, cfg.series)
    return out


def anticommutator_pairing_quadrature(z: complex, cfg: NumericsConfig = DEFAULT_CONFIG) -> complex:
    """Double-quadrature route for ``<Phi, R(z; XP+PX) Phi>``.

    Both variables run in ``log`` scale, which turns the algebraic endpoint singularity at
    the origin into exponential decay.  Below the real axis the kernel is
    integrated over ``0 < s < w``, above it over ``0 < w < s`` (the branch
    that is square integrable there).
    """
    z = complex(z)
    if z.imag == 0:
        raise DomainError("the resolvent pairing needs Im z != 0")
    p = (1j * z - 1.0) / 2.0
    q = (-1j * z - 1.0) / 2.0
    log_r = math.log(max(cfg.decay_radius, VACUUM.decay_radius))
    x_nodes, x_weights = np.polynomial.legendre.leggauss(24)
    lower = z.imag < 0
    # inner integrand in y = log w: w^{q+1} exp(-w^2/2)
    kq = q + 1.0

    def inner(x):
        # above the axis the inner value is returned scaled by exp(-kq x)
        if lower:
            a, b, shift = x, log_r, 0.0
        else:
            a, b, shift = x - 40.0 / max(kq.real, 1e-3), x, x
        if b <= a:
            return 0.0j
        n_panels = max(1, int(math.ceil((b - a) / 0.5)))
        y, w = gauss_legendre_panels(a, b, n_panels, 24)
        return np.sum(w * np.exp(kq * (y - shift) - 0.5 * np.exp(2.0 * y)))

    kp = p + 1.0
    k_out = kp if lower else kp + kq

    def outer(x):
        return complex(np.exp(k_out * x - 0.5 * math.exp(2.0 * x))) * inner(x)

    # the full integrand decays like exp(min(Re kp, 1) x) as x -> -inf
    x_lo = -40.0 / min(kp.real, 1.0) if lower else -40.0
    integral = _cquad(outer, x_lo, log_r, 0.1 * cfg.cross_check_tol)
    sign = 1j if lower else -1j
    return sign * integral / math.sqrt(math.pi)


# --------------------------------------------------------------------------
# (X^2 + P^2)/2
# --------------------------------------------------------------------------

def resolvent_oscillator(a, g: TestFunction, s, c1=0.0, c2=0.0, cfg: NumericsConfig = DEFAULT_CONFIG):
    """General solution of ``G'' - (s^2 - 2a) G = 2 g`` built from Weber functions.

    ``c1 M1(s sqrt2) + c2 M2(s sqrt2)`` plus the variation-of-parameters
    integral, whose lower limit ``-inf`` is truncated at ``-R sqrt2`` with
    ``R = max(cfg.decay_radius, g.decay_radius)``.  ``s`` may be an array.
    """
    pair = weber_pair(a, cfg)
    lower = -SQRT2 * max(cfg.decay_radius, g.decay_radius)
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.empty(s_arr.shape, dtype=complex)
    for i, si in enumerate(s_arr):
        big_s = SQRT2 * si
        i1, i2 = _weber_integrals(pair, g, lower, big_s)
        m1s, m2s = pair.m1(big_s), pair.m2(big_s)
        out[i] = c1 * m1s + c2 * m2s + (m2s * i1 - m1s * i2)
    return complex(out[0]) if np.ndim(s) == 0 else out


def _weber_integrals(pair, g, lower, upper, panel=0.5, order=24):
    if upper == lower:
        return 0.0j, 0.0j
    n_panels = max(1, int(math.ceil(abs(upper - lower) / panel)))
    w, wt = gauss_legendre_panels(lower, upper, n_panels, order)
    gw = g.eval(w / SQRT2)
    return np.sum(wt * gw * pair.m1(w)), np.sum(wt * gw * pair.m2(w))


def fit_decaying_constants(a, g: TestFunction, cfg: NumericsConfig = DEFAULT_CONFIG):
    """Constants ``(c1, c2)`` making the oscillator solution vanish at ``s = +-R``.

    With ``R`` several widths of the vacuum this selects the square-integrable
    solution up to an error of order ``exp(-R^2/2)``.
    """
    pair = weber_pair(a, cfg)
    r = max(cfg.decay_radius, g.decay_radius)
    lower = -SQRT2 * r
    i1, i2 = _weber_integrals(pair, g, lower, SQRT2 * r)
    top = SQRT2 * r
    particular_top = pair.m2(top) * i1 - pair.m1(top) * i2
    mat = np.array([[pair.m1(top), pair.m2(top)], [pair.m1(lower), pair.m2(lower)]], dtype=complex)
    rhs = np.array([-particular_top, 0.0], dtype=complex)
    c1, c2 = np.linalg.solve(mat, rhs)
    return complex(c1), complex(c2)


def vacuum_resolvent_oscillator(z):
    """``<Phi, R(z; (X^2+P^2)/2) Phi> = 1/(z - 1/2)``: the vacuum is the ground state."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0.5):
        raise PoleError("z = 1/2 is the eigenvalue of the vacuum")
    out = 1.0 / (z - 0.5)
    return complex(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# finite matrices
# --------------------------------------------------------------------------

def finite_resolvent(spec: ObservableSpec, z, cfg: NumericsConfig = DEFAULT_CONFIG) -> np.ndarray:
    """``(z I - H)^{-1}`` by a direct linear solve."""
    _require_finite(spec)
    z = complex(z)
    a = z * np.eye(spec.matrix.shape[0]) - spec.matrix
    smin = np.linalg.svd(a, compute_uv=False)[-1]
    if smin < cfg.sing_tol:
        raise SingularityError(f"z = {z} is within {smin:.3g} of the spectrum")
    return np.linalg.solve(a, np.eye(a.shape[0], dtype=complex))


def _finite_pairing(spec, z, cfg):
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    if np.any(np.abs(flat.imag) < cfg.sing_tol):
        # |Im z| bounds the smallest singular value from below; check the rest directly
        eig = np.linalg.eigvalsh(spec.matrix)
        dist = np.min(np.abs(flat[:, None] - eig[None, :]), axis=1)
        if np.any(dist < cfg.sing_tol):
            raise SingularityError("pairing requested at an eigenvalue")
    n = spec.matrix.shape[0]
    a = flat[:, None, None] * np.eye(n)[None] - spec.matrix[None]
    v = spec.vacuum.astype(complex)
    x = np.linalg.solve(a, np.broadcast_to(v, (flat.size, n))[..., None])[..., 0]
    out = x @ v.conj()
    return out.reshape(z.shape)


def vacuum_pairing(spec: ObservableSpec, z, cfg: NumericsConfig = DEFAULT_CONFIG):
    """Vectorised ``<Phi, R(z; T) Phi>`` for any supported observable."""
    z = np.asarray(z, dtype=complex)
    if spec.kind is ObservableKind.FINITE_MATRIX:
        return _finite_pairing(spec, z, cfg)
    if np.any(z.imag == 0):
        raise DomainError("the resolvent pairing needs Im z != 0")
    if spec.kind is ObservableKind.ANTICOMMUTATOR:
        return _anticommutator_pairing_closed(z, cfg)
    return 1.0 / (z - 0.5)


def _require_finite(spec):
    if not spec.is_finite:
        raise DomainError("this operation needs a FiniteMatrix observable")


# --------------------------------------------------------------------------
# symmetry
# --------------------------------------------------------------------------

def apply_observable(spec: ObservableSpec, f: TestFunction, x):
    """The differential expression of the observable applied to ``f``."""
    if spec.kind is ObservableKind.ANTICOMMUTATOR:
        return -1j * f(x) - 2j * x * f.d1(x)
    if spec.kind is ObservableKind.OSCILLATOR:
        return 0.5 * (np.square(x) * f(x) - f.d2(x))
    raise DomainError("apply_observable is for the unbounded observables")


def symmetry_check(spec: ObservableSpec, f, g, cfg: NumericsConfig = DEFAULT_CONFIG) -> float:
    """``|<Tf, g> - <f, Tg>|``.

    ``f`` and ``g`` are TestFunctions for the unbounded observables and
    plain vectors for a FiniteMatrix.
    """
    if spec.is_finite:
        f = np.asarray(f, dtype=complex)
        g = np.asarray(g, dtype=complex)
        h = spec.matrix
        return float(abs(np.vdot(h @ f, g) - np.vdot(f, h @ g)))
    radius = max(f.decay_radius, g.decay_radius)
    x, w = gauss_legendre_panels(-radius, radius, int(math.ceil(2 * radius / 0.25)), 20)
    fx, gx = f(x), g(x)
    tf, tg = apply_observable(spec, f, x), apply_observable(spec, g, x)
    lhs = np.sum(w * np.conj(tf) * gx)
    rhs = np.sum(w * np.conj(fx) * tg)
    return float(abs(lhs - rhs))
