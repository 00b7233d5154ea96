"""Numerical integration helpers.

``adaptive_gauss_legendre`` does globally adaptive bisection with a pair of
Gauss-Legendre rules per panel; ``grid_quadrature`` is the tensor midpoint
rule on the unit square.
"""

from functools import lru_cache

import numpy as np

from taildep.errors import PreconditionError

__all__ = ["adaptive_gauss_legendre", "grid_quadrature", "midpoints"]


@lru_cache(maxsize=None)
def _gl_nodes(order):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def _gl_panel(f, lo, hi, order):
    nodes, weights = _gl_nodes(order)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * nodes[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    return half * (fx @ weights)


def adaptive_gauss_legendre(f, a, b, tol=1e-10, order=20, max_panels=4096):
    """Integrate a vectorized scalar function over ``[a, b]``.

    Each panel is integrated with an ``order``-point and a ``2*order``-point
    Gauss-Legendre rule; their difference is the panel error estimate. The
    panel with the largest estimate is bisected until the summed estimate is
    below ``tol`` (absolute).

    Parameters
    ----------
    f : callable
        Maps a 1-D float array of abscissae to an array of the same shape.
    a, b : float
        Integration limits; ``a > b`` flips the sign.
    tol : float
        Absolute error target.
    order : int
        Points in the coarse rule.
    max_panels : int
        Safety cap on the number of panels.

    Returns
    -------
    float
    """
    if a == b:
        return 0.0
    if a > b:
        return -adaptive_gauss_legendre(f, b, a, tol, order, max_panels)

    lo = np.array([a], dtype=float)
    hi = np.array([b], dtype=float)
    coarse = _gl_panel(f, lo, hi, order)
    fine = _gl_panel(f, lo, hi, 2 * order)
    done_value = 0.0
    done_error = 0.0
    while True:
        err = np.abs(fine - coarse)
        total_err = done_error + err.sum()
        if total_err <= tol or lo.size >= max_panels:
            return float(done_value + fine.sum())
        # freeze panels that are already negligible, split the rest
        small = err <= tol * (hi - lo) / (b - a) * 0.5
        done_value += fine[small].sum()
        done_error += err[small].sum()
        lo, hi = lo[~small], hi[~small]
        mid = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, mid]), np.concatenate([mid, hi])
        coarse = _gl_panel(f, lo, hi, order)
        fine = _gl_panel(f, lo, hi, 2 * order)


def midpoints(m):
    """Cell centres of a uniform ``m``-cell partition of ``[0, 1]``."""
    return (np.arange(m) + 0.5) / m


def grid_quadrature(f, m=400):
    """Midpoint-rule integral of ``f(x, y)`` over the unit square.

    ``f`` receives two broadcastable arrays (an ``m x 1`` column of x values
    and a ``1 x m`` row of y values) and must return an array whose leading
    two axes are ``m x m``. Trailing axes (vector-valued integrands) are
    preserved in the result.
    """
    if m < 2:
        raise PreconditionError("grid_quadrature needs m >= 2")
    t = midpoints(m)
    vals = np.asarray(f(t[:, None], t[None, :]), dtype=float)
    vals = np.broadcast_to(vals, (m, m) + vals.shape[2:])
    out = vals.sum(axis=(0, 1)) / (m * m)
    return float(out) if out.ndim == 0 else out
