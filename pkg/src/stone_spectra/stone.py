"""Spectral CDFs from resolvent pairings.

The vacuum CDF is the eps -> 0+ limit of

    F_eps(lam) = (1/pi) int_{-T}^{lam} Im <Phi, R(t - i eps) Phi> dt.

``stone_cdf`` evaluates F_eps on the caller's grid for every eps in the
schedule, finds atoms from the Lorentzian peaks of the smoothed density,
removes their exact arctan contribution, extrapolates the smooth remainder
polynomially in eps and adds the atoms back as right-continuous jumps.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .config import DEFAULT_CONFIG, DEFAULT_SERIES, NumericsConfig, SeriesControl
from .errors import DomainError, ExtrapolationError, NumericalError
from .quadrature import adaptive_panels
from .resolvents import HEISENBERG, ObservableSpec, vacuum_pairing
from .specfun import incomplete_beta

# peaks lighter than this are not resolved as atoms; they stay in the smooth part
DEFLATE_TOL = 1e-6
_DESCENT_LEVELS = 8
_SCAN_MARGIN = 0.4


@dataclass
class SpectralCDF:
    """A CDF sampled on a grid, with its atoms listed separately.

    ``atoms`` holds point masses above the detection threshold;
    ``minor_atoms`` holds lighter ones that were still resolved as point
    masses (their jumps are included in ``values``).
    """

    grid: np.ndarray
    values: np.ndarray
    atoms: list = field(default_factory=list)
    tail_tolerance: float = 0.0
    error_budget: dict = field(default_factory=dict)
    minor_atoms: list = field(default_factory=list)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        self.atoms = [(float(x), float(m)) for x, m in self.atoms]
        self.minor_atoms = [(float(x), float(m)) for x, m in self.minor_atoms]
        if self.grid.shape != self.values.shape:
            raise DomainError("grid and values must have the same length")

    def __call__(self, lam):
        """Linear interpolation between grid points (0 and 1 outside)."""
        return np.interp(lam, self.grid, self.values, left=0.0, right=1.0)

    @property
    def total_atom_mass(self) -> float:
        return float(sum(m for _, m in self.atoms))

    def check_invariants(self, slack: float = 1e-9) -> None:
        if np.any(np.diff(self.grid) <= 0):
            raise NumericalError("grid is not strictly ascending")
        if np.any(np.diff(self.values) < -slack):
            raise NumericalError("CDF values decrease")
        if np.any(self.values < -slack) or np.any(self.values > 1 + slack):
            raise NumericalError("CDF values leave [0, 1]")
        if any(not (0 < m <= 1 + slack) for _, m in self.atoms):
            raise NumericalError("atom mass outside (0, 1]")
        if self.total_atom_mass > 1 + slack:
            raise NumericalError("atom masses sum to more than 1")


def _as_grid(grid):
    g = np.asarray(grid, dtype=float).ravel()
    if g.size == 0 or not np.all(np.isfinite(g)):
        raise DomainError("grid must be a non-empty list of finite reals")
    if np.any(np.diff(g) <= 0):
        raise DomainError("grid must be strictly ascending")
    return g


def stone_cdf(spec: ObservableSpec, grid, cfg: NumericsConfig = DEFAULT_CONFIG) -> SpectralCDF:
    """Vacuum spectral CDF of ``spec`` on ``grid`` by Stone's formula."""
    grid = _as_grid(grid)
    eps = np.asarray(cfg.eps_schedule, dtype=float)
    if eps.size < 2:
        raise DomainError("the eps schedule needs at least two entries")
    lower = min(-cfg.t_cutoff, float(grid[0]))

    def im_pairing(t, e):
        return vacuum_pairing(spec, np.asarray(t, dtype=float) - 1j * e, cfg).imag

    atoms = _find_atoms(im_pairing, grid, eps[-1])
    out_grid = grid
    if cfg.refine_grid and atoms:
        out_grid = np.union1d(grid, [loc for loc, _ in atoms])

    edges = np.concatenate([[lower], out_grid])

    def smoothed(e):
        cells, err = adaptive_panels(
            lambda t: im_pairing(t, e) / math.pi, edges, tol=cfg.quad_tol, max_width=8.0 * e
        )
        return np.cumsum(cells), err

    with ThreadPoolExecutor(max_workers=cfg.worker_count()) as pool:
        results = list(pool.map(smoothed, eps))
    f_eps = np.array([r[0] for r in results])
    quad_err = max(r[1] for r in results)

    # strip the atoms' exact pre-limit contribution before extrapolating
    remainder = f_eps.copy()
    for loc, mass in atoms:
        remainder -= mass / math.pi * (
            np.arctan((out_grid[None, :] - loc) / eps[:, None]) - np.arctan((lower - loc) / eps[:, None])
        )
    best, prev = _extrapolate(remainder, eps)
    drift = float(np.max(np.abs(best - prev)))
    if drift > 10.0 * cfg.cross_check_tol:
        worst = int(np.argmax(np.abs(best - prev)))
        raise ExtrapolationError(
            f"eps extrapolation unstable: successive extrapolants differ by {drift:.3g} at lambda={out_grid[worst]:.6g}"
        )

    values = best.copy()
    for loc, mass in atoms:
        snap = 1e-9 * max(1.0, abs(loc))
        values += mass * (out_grid >= loc - snap)

    raw = values.copy()
    values = np.maximum.accumulate(np.clip(values, 0.0, 1.0))
    adjust = float(np.max(np.abs(values - raw)))

    tail = eps[-1] / (math.pi * max(1.0, out_grid[0] - lower)) if out_grid[0] > lower else eps[-1] / math.pi
    reported = [(loc, min(mass, 1.0)) for loc, mass in atoms if mass > cfg.atom_jump_tol]
    minor = [(loc, mass) for loc, mass in atoms if mass <= cfg.atom_jump_tol]
    budget = {
        "extrapolation": drift,
        "tail": tail,
        "quadrature": quad_err,
        "monotone_adjustment": adjust,
    }
    return SpectralCDF(out_grid, values, reported, tail_tolerance=tail, error_budget=budget, minor_atoms=minor)


def _richardson(f_big, f_small, e_big, e_small):
    return (e_big * f_small - e_small * f_big) / (e_big - e_small)


def _extrapolate(rows, eps):
    """Polynomial extrapolation to eps = 0 on the smallest eps values.

    Uses three points (error O(eps^3)) when the schedule has at least four
    entries, so the same rule on the window one step coarser is available
    as the stability estimate; shorter schedules fall back to two points.
    """
    npts = 3 if eps.size >= 4 else 2
    best = _poly_zero(rows[-npts:], eps[-npts:])
    if eps.size > npts:
        prev = _poly_zero(rows[-npts - 1:-1], eps[-npts - 1:-1])
    else:
        prev = best
    return best, prev


def _poly_zero(rows, eps):
    # weights w with sum_j w_j eps_j^k = [k == 0] for k < len(eps)
    vander = np.vander(eps, len(eps), increasing=True)
    w = np.linalg.solve(vander.T, np.eye(len(eps))[0])
    return w @ rows


def _find_atoms(im_pairing, grid, eps_min):
    """Atoms as peaks of ``eps * Im P(t - i eps)`` that survive eps -> 0.

    For an isolated atom of mass m at x the peak value is exactly m, while
    an absolutely continuous part contributes only O(eps).  Peaks are
    tracked down a geometric ladder of eps values, each one relocated by a
    bounded Brent search, and the mass is the linear extrapolation of the
    last two peak heights.
    """
    lo, hi = grid[0] - _SCAN_MARGIN, grid[-1] + _SCAN_MARGIN
    n_scan = int(math.ceil((hi - lo) / (0.25 * eps_min))) + 1
    xs = np.linspace(lo, hi, n_scan)
    peaks = _local_maxima(xs, eps_min * im_pairing(xs, eps_min), 0.5 * DEFLATE_TOL)
    heights = {}
    e_prev = eps_min
    for _ in range(_DESCENT_LEVELS):
        e = 0.25 * e_prev
        found = []
        for x0 in peaks:
            win = np.linspace(x0 - 3 * e_prev, x0 + 3 * e_prev, 25)
            local = _local_maxima(win, e * im_pairing(win, e), 0.5 * DEFLATE_TOL, limit=4)
            for xc in local:
                xb, hb = _refine_peak(im_pairing, xc, e, win[1] - win[0])
                if hb > 0.5 * DEFLATE_TOL:
                    found.append((xb, hb, heights.get(x0, (None, None))[1]))
        found.sort()
        merged = []
        for xb, hb, h_prev in found:
            if merged and abs(xb - merged[-1][0]) < e:
                if hb > merged[-1][1]:
                    merged[-1] = (xb, hb, h_prev)
                continue
            merged.append((xb, hb, h_prev))
        peaks = [m[0] for m in merged]
        heights = {m[0]: (m[2], m[1]) for m in merged}
        e_prev = e
        if not peaks:
            return []
    atoms = []
    e_last, e_before = e_prev, 4.0 * e_prev
    for x in peaks:
        h_before, h_last = heights[x]
        mass = h_last if h_before is None else _richardson(h_before, h_last, e_before, e_last)
        if mass > DEFLATE_TOL:
            atoms.append((float(x), float(mass)))
    return atoms


def _local_maxima(xs, ys, floor, limit=None):
    ys = np.asarray(ys)
    inner = (ys[1:-1] >= ys[:-2]) & (ys[1:-1] > ys[2:]) & (ys[1:-1] > floor)
    idx = np.nonzero(inner)[0] + 1
    # a monotone window can still hold its maximum at an end point
    if ys[0] > ys[1] and ys[0] > floor:
        idx = np.concatenate([[0], idx])
    if ys[-1] > ys[-2] and ys[-1] > floor:
        idx = np.concatenate([idx, [ys.size - 1]])
    if limit is not None and idx.size > limit:
        idx = np.sort(idx[np.argsort(ys[idx])[::-1][:limit]])
    return [float(xs[i]) for i in idx]


def _refine_peak(im_pairing, x0, e, width):
    # search in the offset from x0: the bounded method adds a tolerance
    # relative to |x|, which would cap the location accuracy near 1e-8 |x0|
    res = minimize_scalar(
        lambda u: -e * float(im_pairing(x0 + u, e)),
        bounds=(-width, width),
        method="bounded",
        options={"xatol": 1e-3 * e},
    )
    return float(x0 + res.x), float(-res.fun)


# --------------------------------------------------------------------------
# finite-dimensional oracles
# --------------------------------------------------------------------------

def stone_cdf_matrix_exact(spec: ObservableSpec, lam, eps):
    """Closed pre-limit CDF for the 3x3 Heisenberg observable.

    ``(1/3pi)[x^2 atan((lam-2)/eps) - (x^2-3) atan((lam+1)/eps)] + 1/2``
    with ``x`` the sum of the vacuum components.
    """
    if not spec.is_finite or spec.matrix.shape != (3, 3) or np.max(np.abs(spec.matrix - HEISENBERG)) > 1e-12:
        raise DomainError("stone_cdf_matrix_exact applies to the 3x3 Heisenberg observable only")
    if not eps > 0:
        raise DomainError("eps must be positive")
    x2 = float(np.sum(spec.vacuum)) ** 2
    lam = np.asarray(lam, dtype=float)
    out = (x2 * np.arctan((lam - 2.0) / eps) - (x2 - 3.0) * np.arctan((lam + 1.0) / eps)) / (3 * math.pi) + 0.5
    return float(out) if out.ndim == 0 else out


def matrix_cdf_arctan(spec: ObservableSpec, lam, eps):
    """Pre-limit CDF ``sum_i w_i (atan((lam - x_i)/eps)/pi + 1/2)`` for any symmetric matrix."""
    if not spec.is_finite:
        raise DomainError("matrix_cdf_arctan needs a FiniteMatrix observable")
    vals, vecs = np.linalg.eigh(spec.matrix)
    w = np.abs(vecs.T @ spec.vacuum) ** 2
    lam = np.asarray(lam, dtype=float)
    out = np.sum(w * (np.arctan((lam[..., None] - vals) / eps) / math.pi + 0.5), axis=-1)
    return float(out) if out.ndim == 0 else out


def eig_cdf_oracle(spec: ObservableSpec, grid, cluster_tol: float = 1e-9) -> SpectralCDF:
    """Exact vacuum CDF from a symmetric eigendecomposition."""
    if not spec.is_finite:
        raise DomainError("eig_cdf_oracle needs a FiniteMatrix observable")
    grid = _as_grid(grid)
    try:
        vals, vecs = np.linalg.eigh(spec.matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigendecomposition failed: {exc}") from exc
    weights = np.abs(vecs.T @ spec.vacuum) ** 2
    atoms = []
    start = 0
    for i in range(1, vals.size + 1):
        if i == vals.size or vals[i] - vals[i - 1] > cluster_tol:
            mass = float(np.sum(weights[start:i]))
            if mass > 1e-14:
                atoms.append((float(np.mean(vals[start:i])), mass))
            start = i
    values = np.zeros(grid.shape)
    for loc, mass in atoms:
        values += mass * (grid >= loc)
    return SpectralCDF(grid, np.minimum(values, 1.0), atoms)


# --------------------------------------------------------------------------
# XP + PX closed form
# --------------------------------------------------------------------------

def anticommutator_beta_density(t, ctl: SeriesControl = DEFAULT_SERIES, check: bool = True):
    """Spectral density of ``XP + PX`` in the vacuum, from incomplete Beta values.

    ``(1-i)/(8 pi) [e^{-pi t/4} B(-1; (1-it)/4, 1/2) + e^{pi t/4} B(-1; (1+it)/4, 1/2)]``.
    The bracket combines to a real number; with ``check`` the imaginary
    residue must stay below 1e-10.
    """
    t = np.asarray(t, dtype=float)
    b_minus = incomplete_beta(-1.0, (1.0 - 1j * t) / 4.0, 0.5, ctl)
    b_plus = incomplete_beta(-1.0, (1.0 + 1j * t) / 4.0, 0.5, ctl)
    val = (1 - 1j) / (8 * math.pi) * (np.exp(-math.pi * t / 4) * b_minus + np.exp(math.pi * t / 4) * b_plus)
    val = np.asarray(val)
    if check and np.any(np.abs(val.imag) > 1e-10):
        raise NumericalError(f"Beta-form density has imaginary residue {np.max(np.abs(val.imag)):.3g}")
    return float(val.real) if val.ndim == 0 else val.real


def anticommutator_cdf_closed(lam, ctl: SeriesControl = DEFAULT_SERIES, quad: NumericsConfig = DEFAULT_CONFIG):
    """Vacuum CDF of ``XP + PX`` by quadrature of the Beta-form density from ``-t_cutoff``."""
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    order = np.argsort(lam_arr)
    lower = -quad.t_cutoff
    pts = np.maximum(lam_arr[order], lower)
    edges = np.concatenate([[lower], pts])
    cells, _ = adaptive_panels(
        lambda t: anticommutator_beta_density(t, ctl), edges, tol=quad.quad_tol, max_width=1.0
    )
    out = np.empty_like(lam_arr)
    out[order] = np.cumsum(cells)
    return float(out[0]) if np.ndim(lam) == 0 else out
