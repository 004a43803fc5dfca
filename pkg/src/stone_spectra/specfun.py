"""Special functions with real or complex parameters.

Everything here is evaluated from its defining power series in double
precision.  Series in the variable ``z`` are array-friendly: parameters and
``z`` broadcast against each other and the result has the broadcast shape
(a Python scalar for scalar input).

Complex powers use the principal branch, ``z**a = exp(a*log z)`` with
``arg z`` in ``(-pi, pi]``.  On the negative real axis the series alternate
in sign; for ``|z| > 0.9`` they are summed with the Cohen-Rodriguez
Villegas-Zagier accelerator, which is what makes ``z = -1`` practical.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .config import DEFAULT_SERIES, SeriesControl
from .errors import DomainError, NonConvergenceError, PoleError

__all__ = [
    "pochhammer",
    "stirling2",
    "stirling_egf",
    "incomplete_beta",
    "gauss_2f1",
    "beta_2f1_identity_residual",
    "kummer_1f1",
    "binomial_1f0",
    "principal_power",
]

# Magnitude above which negative real z is summed with the accelerator.
_ACCEL_RADIUS = 0.9
_ACCEL_TERMS = (40, 56)


def pochhammer(x, n: int):
    """Rising factorial ``x (x+1) ... (x+n-1)``; 1 for ``n = 0``."""
    n = _nonneg_int(n, "n")
    out = 1
    for j in range(n):
        out = out * (x + j)
    return out


def stirling2(n: int, k: int) -> int:
    """Stirling number of the second kind, as an exact Python integer."""
    n = _nonneg_int(n, "n")
    k = _nonneg_int(k, "k")
    if k > n:
        return 0
    row = [1] + [0] * k  # S(0, j)
    for m in range(1, n + 1):
        for j in range(min(m, k), 0, -1):
            row[j] = j * row[j] + row[j - 1]
        row[0] = 0
    return row[k]


def stirling_egf(t: float, k: int, ctl: SeriesControl = DEFAULT_SERIES) -> float:
    """Truncated sum of ``(2t)^n S(n,k) / n!`` over ``n >= 0``.

    Closed form for comparison: ``(exp(2t) - 1)^k / k!``.
    """
    k = _nonneg_int(k, "k")
    x = 2.0 * float(t)
    # a[j] = S(n, j) / n!, advanced in n with S(n,j) = j S(n-1,j) + S(n-1,j-1)
    a = [1.0] + [0.0] * k
    terms = [a[k]]  # n = 0
    small = 0
    power = 1.0
    partial = terms[0]
    for n in range(1, ctl.max_terms + k + 1):
        for j in range(min(n, k), 0, -1):
            a[j] = (j * a[j] + a[j - 1]) / n
        a[0] = 0.0
        power *= x
        term = power * a[k]
        terms.append(term)
        partial += term
        if n < k:
            continue
        small = small + 1 if abs(term) < ctl.rel_tol * abs(partial) + ctl.abs_tol else 0
        if small >= 3:
            return math.fsum(terms)
    raise NonConvergenceError(f"stirling_egf(t={t}, k={k}) did not converge in {ctl.max_terms} terms")


def principal_power(z, a):
    """``z**a`` on the principal branch, with ``-0.0`` imaginary parts folded to ``+0``."""
    z = np.asarray(z, dtype=complex) + 0.0  # -0.0 + 0.0 == +0.0
    z = z.real + 1j * (z.imag + 0.0)
    a = np.asarray(a, dtype=complex)
    zero = z == 0
    if not np.any(zero):
        return np.exp(a * np.log(z))
    # 0^a = 0 for Re a > 0 and 1 for a = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(a * np.log(np.where(zero, 1.0, z)))
    a_b = np.broadcast_to(a, out.shape)
    zero_b = np.broadcast_to(zero, out.shape)
    return np.where(zero_b, np.where(a_b == 0, 1.0 + 0j, 0.0j), out)


def incomplete_beta(z, a, b, ctl: SeriesControl = DEFAULT_SERIES):
    """Incomplete Beta function ``B(z; a, b)`` for ``|z| <= 1``.

    Uses ``B(z; a, b) = z^a * sum_n (1-b)_n z^n / (n! (a+n))``.  On the
    unit circle ``Re a > 0`` is required.
    """
    z, a, b = _as_complex(z, a, b)
    if np.any(_is_nonpositive_integer(a)):
        raise PoleError("incomplete_beta: a is a nonpositive integer")
    _check_disc(z, "incomplete_beta")
    on_circle = np.abs(z) == 1.0
    if np.any(on_circle & ~(np.broadcast_to(a.real, np.broadcast(z, a).shape) > 0)):
        raise DomainError("incomplete_beta: Re a > 0 required on |z| = 1")

    def ratio(n):
        return (1.0 - b + n) / (n + 1.0) * (a + n) / (a + n + 1.0)

    series = _hypergeometric_sum(1.0 / a, ratio, z, ctl, "incomplete_beta")
    return _unwrap(principal_power(z, a) * series)


def gauss_2f1(a, b, c, z, ctl: SeriesControl = DEFAULT_SERIES):
    """Gauss hypergeometric function ``2F1(a, b; c; z)`` for ``|z| <= 1``."""
    a, b, c, z = _as_complex(a, b, c, z)
    if np.any(_is_nonpositive_integer(c)):
        raise PoleError("gauss_2f1: c is a nonpositive integer")
    _check_disc(z, "gauss_2f1")
    excess = np.broadcast_to((c - a - b).real, np.broadcast(a, b, c, z).shape)
    zb = np.broadcast_to(z, excess.shape)
    if np.any((zb == 1.0) & ~(excess > 0)):
        raise DomainError("gauss_2f1: z = 1 requires Re(c - a - b) > 0")
    if np.any((np.abs(zb) == 1.0) & ~(excess > -1)):
        raise DomainError("gauss_2f1: |z| = 1 requires Re(c - a - b) > -1")

    def ratio(n):
        return (a + n) * (b + n) / ((c + n) * (n + 1.0))

    return _unwrap(_hypergeometric_sum(1.0, ratio, z, ctl, "gauss_2f1"))


def beta_2f1_identity_residual(a, b, z, ctl: SeriesControl = DEFAULT_SERIES) -> float:
    """``|2F1(a, b; a+1; z) - (a / z^a) B(z; a, 1-b)|``."""
    a, b, z = (complex(v) for v in (a, b, z))
    lhs = gauss_2f1(a, b, a + 1.0, z, ctl)
    rhs = a / principal_power(z, a) * incomplete_beta(z, a, 1.0 - b, ctl)
    return float(abs(lhs - complex(rhs)))


def kummer_1f1(a, c, z, ctl: SeriesControl = DEFAULT_SERIES):
    """Kummer's confluent hypergeometric function ``1F1(a; c; z)`` (entire in z)."""
    a, c, z = _as_complex(a, c, z)
    if np.any(_is_nonpositive_integer(c)):
        raise PoleError("kummer_1f1: c is a nonpositive integer")

    def ratio(n):
        return (a + n) / ((c + n) * (n + 1.0))

    return _unwrap(_hypergeometric_sum(1.0, ratio, z, ctl, "kummer_1f1", accelerate=False))


def binomial_1f0(a, z, ctl: SeriesControl = DEFAULT_SERIES):
    """``1F0(a;; z) = sum_n (a)_n z^n / n!`` for ``|z| <= 1``, ``z != 1``.

    Equals ``(1 - z)^{-a}``; summed as a series so it can serve as an
    independent route to that closed form.
    """
    a, z = _as_complex(a, z)
    _check_disc(z, "binomial_1f0")
    if np.any((np.abs(z) == 1.0) & ~(np.broadcast_to(a.real, np.broadcast(a, z).shape) < 1)):
        raise DomainError("binomial_1f0: |z| = 1 requires Re a < 1")
    if np.any(z == 1.0):
        raise DomainError("binomial_1f0: z = 1 is a branch point")

    def ratio(n):
        return (a + n) / (n + 1.0)

    return _unwrap(_hypergeometric_sum(1.0, ratio, z, ctl, "binomial_1f0"))


def alternating_sum(terms) -> np.ndarray:
    """Accelerated ``sum_k (-1)^k terms[..., k]`` over the last axis.

    Exact to rounding for moment sequences; the number of terms supplied
    selects the rule.
    """
    terms = np.asarray(terms)
    return terms @ _crvz_weights(terms.shape[-1])


@lru_cache(maxsize=None)
def _crvz_weights(n: int) -> np.ndarray:
    d = (3.0 + math.sqrt(8.0)) ** n
    d = 0.5 * (d + 1.0 / d)
    b, c = -1.0, -d
    w = np.empty(n)
    for k in range(n):
        c = b - c
        w[k] = c / d
        b = (k + n) * (k - n) * b / ((k + 0.5) * (k + 1.0))
    w.setflags(write=False)
    return w


def _hypergeometric_sum(first, ratio, z, ctl, name, accelerate=True):
    """Sum ``t_0 = first``, ``t_{n+1} = t_n * ratio(n) * z`` elementwise."""
    shape = np.broadcast(np.asarray(first), np.asarray(ratio(0)), z).shape
    z = np.broadcast_to(z, shape)
    first = np.broadcast_to(np.asarray(first, dtype=complex), shape)
    out = np.empty(shape, dtype=complex)
    alt = (z.imag == 0) & (z.real < -_ACCEL_RADIUS) if accelerate else np.zeros(shape, bool)
    direct = ~alt

    if np.any(direct):
        out[direct] = _direct_sum(first, ratio, z, direct, ctl, name)
    if np.any(alt):
        out[alt] = _accelerated_sum(first, ratio, z, alt, ctl, name)
    return out


def _direct_sum(first, ratio, z, mask, ctl, name):
    term = first[mask].copy()
    zm = z[mask]
    total = term.copy()
    comp = np.zeros_like(total)
    small = np.zeros(term.shape, dtype=int)
    for n in range(ctl.max_terms):
        r = np.broadcast_to(ratio(n), mask.shape)[mask]
        term = term * r * zm
        # Kahan step
        y = term - comp
        s = total + y
        comp = (s - total) - y
        total = s
        tiny = np.abs(term) < ctl.rel_tol * np.abs(total) + ctl.abs_tol
        small = np.where(tiny, small + 1, 0)
        if np.all(small >= 3):
            return total
    raise NonConvergenceError(f"{name}: series did not converge within {ctl.max_terms} terms")


def _accelerated_sum(first, ratio, z, mask, ctl, name):
    n_lo, n_hi = _ACCEL_TERMS
    n_hi = min(n_hi, max(int(ctl.max_terms), 2))
    n_lo = min(n_lo, n_hi - 1) if n_hi > 2 else 1
    r_abs = -z[mask].real
    terms = np.empty(r_abs.shape + (n_hi,), dtype=complex)
    term = first[mask].copy()
    terms[..., 0] = term
    for n in range(n_hi - 1):
        # alternating sign is carried by the accelerator weights
        term = term * np.broadcast_to(ratio(n), mask.shape)[mask] * r_abs
        terms[..., n + 1] = term
    s_hi = alternating_sum(terms)
    s_lo = alternating_sum(terms[..., :n_lo])
    scale = np.maximum(np.abs(s_hi), np.max(np.abs(terms), axis=-1))
    bad = np.abs(s_hi - s_lo) > np.maximum(1e3 * ctl.rel_tol * scale, ctl.abs_tol)
    if np.any(bad):
        raise NonConvergenceError(f"{name}: accelerated alternating sum is not stable at z = -|z|")
    return s_hi


def _check_disc(z, name):
    if np.any(np.abs(z) > 1.0):
        raise DomainError(f"{name}: |z| <= 1 required (no continuation outside the unit disc)")


def _is_nonpositive_integer(x):
    x = np.asarray(x, dtype=complex)
    return (x.imag == 0) & (x.real <= 0) & (np.round(x.real) == x.real)


def _as_complex(*values):
    out = []
    for v in values:
        arr = np.asarray(v, dtype=complex)
        if not np.all(np.isfinite(arr)):
            raise DomainError("non-finite argument")
        out.append(arr)
    return out


def _unwrap(x):
    x = np.asarray(x)
    return complex(x) if x.ndim == 0 else x


def _nonneg_int(n, name):
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise DomainError(f"{name} must be a nonnegative integer")
    return int(n)
