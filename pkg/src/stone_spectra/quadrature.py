"""Vectorised quadrature rules.

The integrands used by the Stone engine are cheap to evaluate on whole
arrays of nodes (closed-form pairings, batched linear solves), so the
adaptive rule here refines every open panel in one batched call instead of
recursing one interval at a time like QUADPACK.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import QuadratureError

# Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[1::2] = np.concatenate([_WG[:-1], _WG[::-1]])


def adaptive_panels(f, edges, tol=1e-10, max_width=None, max_rounds=60, max_panels=2_000_000):
    """Integrate ``f`` over each cell ``[edges[i], edges[i+1]]``.

    Parameters
    ----------
    f : callable
        Vectorised integrand: 1-D float array -> array of the same length
        (real or complex).
    edges : array_like
        Nondecreasing cell boundaries.
    tol : float
        Absolute error target for the sum over all cells; each panel gets a
        share proportional to its width.
    max_width : float, optional
        Cells are first split into panels no wider than this, so narrow
        features cannot slip between the 15 nodes of a wide panel.

    Returns
    -------
    values : ndarray
        One integral per cell.
    error : float
        Sum of the accepted Kronrod-Gauss error estimates.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) < 0):
        raise ValueError("edges must be a nondecreasing 1-D array with at least two entries")
    total = edges[-1] - edges[0]
    lo, hi, cell = _initial_panels(edges, max_width)
    values = None
    err_total = 0.0
    for _ in range(max_rounds):
        if lo.size == 0:
            break
        if lo.size > max_panels:
            raise QuadratureError("adaptive quadrature exceeded its panel budget")
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo)
        x = mid[:, None] + half[:, None] * _NODES[None, :]
        fx = np.asarray(f(x.ravel())).reshape(x.shape)
        if values is None:
            values = np.zeros(edges.size - 1, dtype=np.result_type(fx.dtype, float))
        k = half * (fx @ _KRONROD)
        g = half * (fx @ _GAUSS)
        err = np.abs(k - g)
        share = tol * (hi - lo) / total if total > 0 else np.full(lo.shape, tol)
        noise = 50.0 * np.finfo(float).eps * half * (np.abs(fx) @ _KRONROD)
        done = (err <= share) | (err <= noise)
        np.add.at(values, cell[done], k[done])
        err_total += float(np.sum(err[done]))
        lo, hi, cell = lo[~done], hi[~done], cell[~done]
        m = 0.5 * (lo + hi)
        lo, hi, cell = np.concatenate([lo, m]), np.concatenate([m, hi]), np.concatenate([cell, cell])
    else:
        raise QuadratureError("adaptive quadrature did not reach its tolerance")
    if values is None:
        values = np.zeros(edges.size - 1)
    return values, err_total


def _initial_panels(edges, max_width):
    lo, hi, cell = [], [], []
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        if b <= a:
            continue
        n = 1 if max_width is None else max(1, int(np.ceil((b - a) / max_width)))
        pts = np.linspace(a, b, n + 1)
        lo.append(pts[:-1])
        hi.append(pts[1:])
        cell.append(np.full(n, i))
    if not lo:
        return np.empty(0), np.empty(0), np.empty(0, dtype=int)
    return np.concatenate(lo), np.concatenate(hi), np.concatenate(cell)


def gauss_legendre_panels(a, b, n_panels, order=20):
    """Nodes and weights of a composite Gauss-Legendre rule on ``[a, b]``."""
    x, w = leggauss(order)
    edges = np.linspace(a, b, int(n_panels) + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights
