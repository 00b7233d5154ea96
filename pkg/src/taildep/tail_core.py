"""Ranks and the rank-based estimators of the stable tail dependence function.

Three estimators are provided, differing only in the rank threshold:

* ``L1``:  ``R_i > n + 1 - k x``
* ``L2``:  ``R_i >= n + 1 - k x``
* ``MID``: ``R_i > n + 1/2 - k x`` (the default, used for estimation)

each counting ``(1/k) #{i : X-condition or Y-condition}``.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from taildep.errors import InvalidSampleError, PreconditionError
from taildep.quadrature import grid_quadrature, midpoints

__all__ = [
    "Sample",
    "RankData",
    "Variant",
    "EmpiricalSTDF",
    "MomentKind",
    "MomentMap",
    "compute_ranks",
    "eval_stdf",
    "integrate_g_empirical",
    "integrate_g_thresholds",
    "grid_quadrature",
]


@dataclass(frozen=True)
class Sample:
    """A bivariate sample ``(x_i, y_i)``, ``i = 1..n``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise InvalidSampleError(f"coordinate lengths differ: {x.size} vs {y.size}")
        if x.size < 2:
            raise InvalidSampleError(f"need at least 2 observations, got {x.size}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise InvalidSampleError("sample contains non-finite values")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_pairs(cls, pairs):
        arr = np.asarray(pairs, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise InvalidSampleError(f"expected an (n, 2) array of pairs, got shape {arr.shape}")
        return cls(arr[:, 0], arr[:, 1])

    @property
    def n(self):
        return self.x.size

    @property
    def pairs(self):
        return np.column_stack([self.x, self.y])


@dataclass(frozen=True)
class RankData:
    rx: np.ndarray
    ry: np.ndarray
    n: int
    tie_warning: bool = False


def _ranks(v):
    order = np.argsort(v, kind="stable")
    r = np.empty(v.size, dtype=np.int64)
    r[order] = np.arange(1, v.size + 1)
    tied = bool(np.any(np.diff(v[order]) == 0))
    return r, tied


def compute_ranks(sample):
    """Ranks of each coordinate within the sample, 1 = smallest.

    Ties are broken by input order and flagged with ``tie_warning``; a
    :class:`RuntimeWarning` is also emitted.
    """
    if not isinstance(sample, Sample):
        sample = Sample.from_pairs(sample)
    rx, tx = _ranks(sample.x)
    ry, ty = _ranks(sample.y)
    tied = tx or ty
    if tied:
        warnings.warn("ties in sample broken by input order", RuntimeWarning, stacklevel=2)
    rx.setflags(write=False)
    ry.setflags(write=False)
    return RankData(rx=rx, ry=ry, n=sample.n, tie_warning=tied)


class Variant(enum.Enum):
    L1 = "L1"
    L2 = "L2"
    MID = "MID"

    @property
    def offset(self):
        return 0.5 if self is Variant.MID else 1.0


@dataclass(frozen=True)
class EmpiricalSTDF:
    """Rank-based estimator of ``l`` for a fixed threshold count ``k``."""

    ranks: RankData
    k: int
    variant: Variant = Variant.MID

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or not 1 <= self.k <= self.ranks.n:
            raise PreconditionError(f"k must be an integer in [1, {self.ranks.n}], got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "variant", Variant(self.variant))

    @classmethod
    def from_sample(cls, sample, k, variant=Variant.MID):
        return cls(compute_ranks(sample), k, variant)

    @property
    def n(self):
        return self.ranks.n

    def __call__(self, x, y):
        return eval_stdf(self, x, y)

    def thresholds(self):
        """Per-observation thresholds ``(x_i, y_i)`` clamped to ``[0, 1]``.

        On the unit square the estimator equals
        ``(1/k) sum_i 1{x > x_i or y > y_i}`` up to a null set.
        """
        c = self.variant.offset
        xi = np.clip((self.n + c - self.ranks.rx) / self.k, 0.0, 1.0)
        yi = np.clip((self.n + c - self.ranks.ry) / self.k, 0.0, 1.0)
        return xi, yi

    def grid(self, xs, ys):
        """Evaluate on the tensor grid ``xs x ys`` (shape ``len(xs), len(ys)``)."""
        xs = np.asarray(xs, dtype=float).ravel()
        ys = np.asarray(ys, dtype=float).ravel()
        n, k = self.n, self.k
        rx = self.ranks.rx.astype(float)
        ry = self.ranks.ry.astype(float)
        # rows that can fail to fire somewhere on the grid but also fire somewhere
        lo_x = _fires(rx, n, k, xs.min(initial=0.0), self.variant)
        lo_y = _fires(ry, n, k, ys.min(initial=0.0), self.variant)
        hi_x = _fires(rx, n, k, xs.max(initial=0.0), self.variant)
        hi_y = _fires(ry, n, k, ys.max(initial=0.0), self.variant)
        always = lo_x | lo_y
        never = ~(hi_x | hi_y)
        active = ~(always | never)
        quiet_x = ~_fires(rx[active, None], n, k, xs[None, :], self.variant)
        quiet_y = ~_fires(ry[active, None], n, k, ys[None, :], self.variant)
        silent = quiet_x.T.astype(float) @ quiet_y.astype(float)
        return (always.sum() + active.sum() - silent) / k


def _fires(r, n, k, t, variant):
    if variant is Variant.L2:
        return r >= n + 1 - k * t
    return r > n + variant.offset - k * t


def eval_stdf(e, x, y):
    """Evaluate the empirical STDF at (broadcastable) points ``x, y``."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    shape = x.shape
    x, y = x.ravel(), y.ravel()
    n, k = e.n, e.k
    rx = e.ranks.rx.astype(float)
    ry = e.ranks.ry.astype(float)
    # observations with both ranks at most n - k - 1 cannot fire anywhere in [0, xmax] x [0, ymax]
    xmax = x.max(initial=0.0)
    ymax = y.max(initial=0.0)
    cand = _fires(rx, n, k, xmax, e.variant) | _fires(ry, n, k, ymax, e.variant)
    rx, ry = rx[cand], ry[cand]
    out = np.empty(x.size)
    chunk = max(1, 2_000_000 // max(rx.size, 1))
    for s in range(0, x.size, chunk):
        xs, ys = x[s : s + chunk], y[s : s + chunk]
        hit = _fires(rx[:, None], n, k, xs[None, :], e.variant) | _fires(
            ry[:, None], n, k, ys[None, :], e.variant
        )
        out[s : s + chunk] = hit.sum(axis=0)
    out /= k
    return out.reshape(shape) if shape else float(out[0])


class MomentKind(enum.Enum):
    TWO_POINT_G = "two-point"
    TRIANGLE_INDICATOR = "triangle"
    GENERIC = "generic"


@dataclass(frozen=True)
class MomentMap:
    """Auxiliary function ``g : [0,1]^2 -> R^p`` of the method of moments.

    The two built-ins are ``g(x, y) = 1{x+y<=1} (x, y)`` (``p = 2``) and
    ``g(x, y) = 1{x+y<=1}`` (``p = 1``). A generic ``g`` is any vectorized
    callable returning an array with a trailing axis of length ``p``; its
    integrability is the caller's responsibility.
    """

    kind: MomentKind
    p: int
    func: Optional[Callable] = field(default=None, compare=False)
    integrable: bool = True

    @classmethod
    def two_point(cls):
        return cls(MomentKind.TWO_POINT_G, 2)

    @classmethod
    def triangle(cls):
        return cls(MomentKind.TRIANGLE_INDICATOR, 1)

    @classmethod
    def generic(cls, func, p, integrable=True):
        return cls(MomentKind.GENERIC, int(p), func, integrable)

    @classmethod
    def from_name(cls, name):
        kind = MomentKind(name)
        if kind is MomentKind.TWO_POINT_G:
            return cls.two_point()
        if kind is MomentKind.TRIANGLE_INDICATOR:
            return cls.triangle()
        raise ValueError("a generic moment map needs a callable; use MomentMap.generic")

    @property
    def builtin(self):
        return self.kind is not MomentKind.GENERIC

    def __call__(self, x, y):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        ind = (x + y <= 1.0).astype(float)
        if self.kind is MomentKind.TWO_POINT_G:
            return np.stack([ind * x, ind * y], axis=-1)
        if self.kind is MomentKind.TRIANGLE_INDICATOR:
            return ind[..., None]
        out = np.asarray(self.func(x, y), dtype=float)
        if out.shape == x.shape and self.p == 1:
            out = out[..., None]
        return out


def _rect_triangle_moments(a, b):
    """Area and first moments of ``[0,a] x [0,b]`` intersected with ``x + y <= 1``.

    ``a`` and ``b`` are arrays with entries in ``[0, 1]``.
    """
    area = a * b
    mx = 0.5 * a * a * b
    my = 0.5 * a * b * b
    s = np.maximum(a + b - 1.0, 0.0)
    # remove the corner triangle beyond x + y = 1: legs s, centroid (a - s/3, b - s/3)
    cut = 0.5 * s * s
    return area - cut, mx - cut * (a - s / 3.0), my - cut * (b - s / 3.0)


def integrate_g_thresholds(xi, yi, k, g):
    """Exact ``∬ g(x,y) (1/k) sum_i 1{x > x_i or y > y_i} dx dy`` for built-in ``g``.

    Thresholds must already be clamped to ``[0, 1]``.
    """
    xi = np.asarray(xi, dtype=float)
    yi = np.asarray(yi, dtype=float)
    area, mx, my = _rect_triangle_moments(xi, yi)
    n = xi.size
    if g.kind is MomentKind.TRIANGLE_INDICATOR:
        return np.array([(n * 0.5 - area.sum()) / k])
    if g.kind is MomentKind.TWO_POINT_G:
        return np.array([(n / 6.0 - mx.sum()) / k, (n / 6.0 - my.sum()) / k])
    raise ValueError("closed-form integration is only available for built-in moment maps")


def integrate_g_empirical(e, g, m=400):
    """``∬ g(x, y) l_hat(x, y) dx dy`` over the unit square.

    Built-in moment maps are integrated exactly; a generic ``g`` uses the
    ``m x m`` midpoint rule.
    """
    if g.builtin:
        xi, yi = e.thresholds()
        return integrate_g_thresholds(xi, yi, e.k, g)
    t = midpoints(m)
    lhat = e.grid(t, t)
    return np.atleast_1d(grid_quadrature(lambda x, y: g(x, y) * lhat[..., None], m))
