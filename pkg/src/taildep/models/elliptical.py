"""Parallel (meta-)elliptical family of tail copulas, indexed by ``ν``.

    R(x, y; ν) = [x ∫_f^{π/2} cos^ν φ dφ + y ∫_0^f sin^ν φ dφ] / ∫_{-π/2}^{π/2} cos^ν φ dφ,
    f = arctan((x/y)^{1/ν}).

Both angular integrals are incomplete beta functions: with
``c_ν = B((ν+1)/2, 1/2)``,

    ∫_0^θ sin^ν φ dφ / c_ν = I_{sin²θ}((ν+1)/2, 1/2) / 2,

so ``R1 = I_{cos²f}(·)/2`` and ``R2 = I_{sin²f}(·)/2``. The default route uses
this identity; ``method="quad"`` integrates the angles with adaptive
Gauss-Legendre instead and serves as an independent check.

Note that ``R(x, y) -> x/2`` as ``y -> ∞``: half of the spectral mass sits
on the endpoints of ``[0, 1]`` (extremes of one coordinate paired with
negative values of the other).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize, special

from taildep.errors import DomainError, ModelError, NotInRangeError
from taildep.models.base import ModelFamily
from taildep.quadrature import adaptive_gauss_legendre
from taildep.tail_core import MomentMap

__all__ = [
    "NU_MIN",
    "NU_MAX",
    "EllipticalParams",
    "EllipticalFamily",
    "ell_R",
    "ell_l",
    "ell_partials",
    "ell_phi",
    "ell_psi",
    "ell_invert",
    "angular_norm",
]

NU_MIN = 0.01
NU_MAX = 100.0
QUAD_TOL = 1e-10


@dataclass(frozen=True)
class EllipticalParams:
    nu: float

    def __post_init__(self):
        nu = float(self.nu)
        _check_nu(nu)
        object.__setattr__(self, "nu", nu)

    def as_array(self):
        return np.array([self.nu])


def _check_nu(nu):
    if not (NU_MIN <= nu <= NU_MAX):
        raise DomainError(f"nu={nu} outside the working range [{NU_MIN}, {NU_MAX}]")
    return nu


def _nu(theta):
    if isinstance(theta, EllipticalParams):
        return theta.nu
    return _check_nu(float(np.asarray(theta, dtype=float).ravel()[0]))


@lru_cache(maxsize=256)
def angular_norm(nu, method="beta"):
    """``c_ν = ∫_{-π/2}^{π/2} cos^ν φ dφ`` (memoized)."""
    if method == "beta":
        return float(special.beta((nu + 1) / 2, 0.5))
    return 2.0 * adaptive_gauss_legendre(lambda t: np.cos(t) ** nu, 0.0, math.pi / 2, QUAD_TOL)


def _angle_sq(x, y, nu):
    """``(cos² f, sin² f)`` computed without forming ``(x/y)^{1/ν}``."""
    with np.errstate(divide="ignore"):
        s = (2.0 / nu) * (np.log(x) - np.log(y))
    return special.expit(-s), special.expit(s)


def _partials_beta(x, y, nu):
    c2, s2 = _angle_sq(x, y, nu)
    h = (nu + 1) / 2
    # I_z(h, 1/2) = 1 - I_{1-z}(1/2, h): evaluate both partials at the smaller of
    # cos² f and sin² f so an argument rounded towards 1 does not cost digits
    w = np.minimum(c2, s2)
    near = special.betainc(h, 0.5, w)
    far = 1.0 - special.betainc(0.5, h, w)
    low = c2 <= s2
    return 0.5 * np.where(low, near, far), 0.5 * np.where(low, far, near)


def _partials_quad(x, y, nu):
    d = (math.log(x) - math.log(y)) / nu
    f = math.pi / 2 - math.atan(math.exp(-d)) if d > 0 else math.atan(math.exp(d))
    c = angular_norm(nu, "quad")
    up = adaptive_gauss_legendre(lambda t: np.cos(t) ** nu, f, math.pi / 2, QUAD_TOL)
    lo = adaptive_gauss_legendre(lambda t: np.sin(t) ** nu, 0.0, f, QUAD_TOL)
    return up / c, lo / c


def ell_partials(x, y, nu, method="beta"):
    """Partial derivatives ``(R1, R2)`` of the elliptical tail copula.

    On the axes the one-sided limits are returned: ``(0, 1/2)`` on ``y = 0``,
    ``(1/2, 0)`` on ``x = 0`` and ``(0, 0)`` at the origin.
    """
    nu = _nu(nu)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if np.any(x < 0) or np.any(y < 0):
        raise DomainError("the tail copula is defined on [0, inf)^2")
    inner = (x > 0) & (y > 0)
    if method == "quad":
        r1 = np.zeros(x.shape)
        r2 = np.zeros(x.shape)
        for idx in zip(*np.nonzero(inner)) if x.ndim else ([()] if inner else []):
            r1[idx], r2[idx] = _partials_quad(float(x[idx]), float(y[idx]), nu)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            r1, r2 = _partials_beta(np.where(inner, x, 1.0), np.where(inner, y, 1.0), nu)
        r1 = np.where(inner, r1, 0.0)
        r2 = np.where(inner, r2, 0.0)
    r1 = np.where((x == 0) & (y > 0), 0.5, r1)
    r2 = np.where((y == 0) & (x > 0), 0.5, r2)
    if r1.ndim == 0:
        return float(r1), float(r2)
    return r1, r2


def ell_R(x, y, nu, method="beta"):
    """Tail copula of the parallel elliptical family; ``R = 0`` on the axes."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    r1, r2 = ell_partials(x, y, nu, method)
    out = np.where((x > 0) & (y > 0), x * r1 + y * r2, 0.0)
    return float(out) if out.ndim == 0 else out


def ell_l(x, y, nu, method="beta"):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return x + y - ell_R(x, y, nu, method)


def ell_psi(nu, method="gl"):
    """``∫_0^1 R(u, 1-u; ν) du``.

    ``method="gl"`` uses :func:`adaptive_gauss_legendre`; ``"quadpack"`` uses
    :func:`scipy.integrate.quad` and is only meant as a cross-check.
    """
    nu = _nu(nu)

    def integrand(u):
        return ell_R(u, 1.0 - u, nu)

    if method == "quadpack":
        from scipy import integrate

        return 2.0 * integrate.quad(integrand, 0.0, 0.5, epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    # R(u, 1-u) is symmetric about u = 1/2; resolve each half to a fraction of the tolerance
    return 2.0 * adaptive_gauss_legendre(integrand, 0.0, 0.5, tol=0.25 * QUAD_TOL)


def ell_phi(nu, method="gl"):
    """Moment map for ``g = 1{x+y<=1}``: ``∬_Δ l = 1/3 - ψ(ν)/3``.

    Uses homogeneity: substituting ``(x, y) = s (u, 1-u)`` gives
    ``∬_Δ R = (1/3) ∫_0^1 R(u, 1-u) du``.
    """
    return 1.0 / 3.0 - ell_psi(nu, method) / 3.0


_knots_lock = threading.Lock()
_knots = None


def _monotone_table():
    """ψ at 64 log-spaced knots of the working range, checked strictly decreasing."""
    global _knots
    if _knots is None:
        with _knots_lock:
            if _knots is None:
                nus = np.geomspace(NU_MIN, NU_MAX, 64)
                psi = np.array([ell_psi(v) for v in nus])
                if not np.all(np.diff(psi) < 0):
                    bad = nus[1:][np.diff(psi) >= 0]
                    raise ModelError(f"moment map not strictly monotone near nu={bad.tolist()}")
                _knots = (nus, psi)
    return _knots


def ell_invert(m):
    """The unique ``ν`` with ``ell_phi(ν) = m``.

    Root finding is done on ``ψ = 1 - 3m`` (which keeps relative precision
    for large ``ν``) over ``log ν``, bracketed by the working range.
    """
    m = float(m)
    if not np.isfinite(m):
        raise NotInRangeError(m)
    nus, psi = _monotone_table()
    target = 1.0 - 3.0 * m
    if not (psi[-1] < target < psi[0]):
        raise NotInRangeError(
            m, f"moment {m!r} outside (phi({NU_MIN}), phi({NU_MAX})) = "
            f"({ell_phi(NU_MIN)!r}, {ell_phi(NU_MAX)!r})"
        )
    j = int(np.searchsorted(-psi, -target))
    lo, hi = math.log(nus[j - 1]), math.log(nus[j])
    s = optimize.brentq(lambda s: ell_psi(math.exp(s)) - target, lo, hi, xtol=1e-13)
    return EllipticalParams(min(max(math.exp(s), NU_MIN), NU_MAX))


class EllipticalFamily(ModelFamily):
    name = "elliptical"
    param_names = ("nu",)
    lower = np.array([NU_MIN])
    upper = np.array([NU_MAX])
    has_closed_form_inverse = True
    has_spectral_atoms = False

    @property
    def default_g(self):
        return MomentMap.triangle()

    def check(self, theta):
        if isinstance(theta, EllipticalParams):
            return theta.as_array()
        t = np.atleast_1d(np.asarray(theta, dtype=float))
        if t.shape != (1,):
            raise DomainError(f"elliptical: expected one parameter, got shape {t.shape}")
        _check_nu(float(t[0]))
        return t

    def params(self, theta):
        return EllipticalParams(float(self.check(theta)[0]))

    def tail_copula(self, x, y, theta):
        return ell_R(x, y, self.params(theta).nu)

    def partials(self, x, y, theta):
        return ell_partials(x, y, self.params(theta).nu)

    def _phi_builtin(self, theta):
        return np.array([ell_phi(self.params(theta).nu)])

    def _invert_builtin(self, moments):
        return ell_invert(moments[0]).as_array()

    def _fd(self, fun, theta):
        # the box is closed here, so stay inside [NU_MIN, NU_MAX]
        theta = self.check(theta)
        h = float(self._fd_steps(theta)[0])
        lo = max(theta[0] - h, NU_MIN)
        hi = min(theta[0] + h, NU_MAX)
        return ((np.asarray(fun(np.array([hi]))) - np.asarray(fun(np.array([lo])))) / (hi - lo))[
            ..., None
        ]
