"""Two-point spectral measure ("natural model") and the factor model behind it.

The spectral measure puts mass ``q = (1-2b)/(1-a-b)`` at ``a`` and
``2 - q`` at ``1 - b`` with ``(a, b)`` in ``(0, 1/2)^2``, so that

    l(x, y; a, b) = q max{a x, (1-a) y} + (2-q) max{(1-b) x, b y}.

With ``g(x, y) = 1{x+y<=1} (x, y)`` the moment map is
``φ(a, b) = (J(a, b), J(b, a))`` and can be inverted through a quadratic
equation in ``b``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from taildep.errors import AmbiguousRootError, DomainError, NotInRangeError
from taildep.models.base import ModelFamily, SpectralMeasure
from taildep.tail_core import MomentMap

__all__ = [
    "TwoPointParams",
    "TwoPointFamily",
    "tp_l",
    "tp_R",
    "tp_spectral",
    "tp_phi",
    "tp_phi_jacobian",
    "tp_invert",
    "tp_partials",
    "factor_to_tp",
    "tp_to_factor",
    "J",
]

log = logging.getLogger(__name__)

# roots closer than this to the edge of (0, 1/2)^2 are treated as outside: at
# a = 1/2 (or b = 1/2) all mass sits at 1/2 and the other parameter is not identified
EDGE_TOL = 1e-9


@dataclass(frozen=True)
class TwoPointParams:
    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (0.0 < a < 0.5 and 0.0 < b < 0.5):
            raise DomainError(f"two-point parameters must lie in (0, 1/2)^2, got a={a}, b={b}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def q(self):
        return (1.0 - 2.0 * self.b) / (1.0 - self.a - self.b)

    def as_array(self):
        return np.array([self.a, self.b])


def _coerce(theta):
    if isinstance(theta, TwoPointParams):
        return theta
    a, b = np.asarray(theta, dtype=float).ravel()
    return TwoPointParams(a, b)


def tp_l(x, y, theta):
    """Stable tail dependence function of the two-point model."""
    t = _coerce(theta)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    q = t.q
    return q * np.maximum(t.a * x, (1 - t.a) * y) + (2 - q) * np.maximum((1 - t.b) * x, t.b * y)


def tp_R(x, y, theta):
    t = _coerce(theta)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    q = t.q
    return q * np.minimum(t.a * x, (1 - t.a) * y) + (2 - q) * np.minimum((1 - t.b) * x, t.b * y)


def tp_spectral(theta):
    t = _coerce(theta)
    return SpectralMeasure(np.array([t.a, 1.0 - t.b]), np.array([t.q, 2.0 - t.q]))


def J(a, b):
    """``∬_{x+y<=1} x l(x, y; a, b) dx dy`` in closed form."""
    return ((2 * a * b - a - b) * (b - a + 1) + a * (b - 1) + 3) / 24.0


def _dJ(a, b):
    da = ((2 * b - 1) * (b - a + 1) - (2 * a * b - a - b) + (b - 1)) / 24.0
    db = ((2 * a - 1) * (b - a + 1) + (2 * a * b - a - b) + a) / 24.0
    return da, db


def tp_phi(theta):
    """Moment map ``(∬_Δ x l, ∬_Δ y l) = (J(a, b), J(b, a))``.

    Accepts boundary values of ``(a, b)`` as plain tuples so the formula can be
    evaluated at its limits (e.g. independence at ``(0, 0)``).
    """
    if isinstance(theta, TwoPointParams):
        a, b = theta.a, theta.b
    else:
        a, b = (float(v) for v in np.asarray(theta, dtype=float).ravel())
    return J(a, b), J(b, a)


def tp_phi_jacobian(theta):
    t = _coerce(theta)
    ja, jb = _dJ(t.a, t.b)
    ka, kb = _dJ(t.b, t.a)
    # second component is J(b, a): d/da uses J's second-argument derivative
    return np.array([[ja, jb], [kb, ka]])


def _quadratic_roots(A, B, C):
    if abs(A) < 1e-14:
        return [] if abs(B) < 1e-300 else [-C / B]
    disc = B * B - 4 * A * C
    if disc < 0:
        if disc > -1e-14 * max(B * B, 1e-300):
            disc = 0.0
        else:
            return []
    sq = np.sqrt(disc)
    # numerically stable pair
    qq = -0.5 * (B + np.copysign(sq, B))
    roots = [qq / A]
    if qq != 0:
        roots.append(C / qq)
    return roots


def tp_invert(Jm, Km, polish=True):
    """Invert the two-point moment map.

    Solves the quadratic in ``b`` and maps the admissible root to ``a``.

    Raises
    ------
    NotInRangeError
        No root gives ``(a, b)`` in ``(0, 1/2)^2``.
    AmbiguousRootError
        Two distinct admissible solutions exist.
    """
    Jm = float(Jm)
    Km = float(Km)
    if not (np.isfinite(Jm) and np.isfinite(Km)):
        raise NotInRangeError((Jm, Km))
    cJ = 3.0 * (8.0 * Jm - 1.0)
    cK = 3.0 * (8.0 * Km - 1.0)
    A = 3.0 * (2 * cJ + 2 * cK + 3)
    B = 3.0 * (-5 * cJ + cK - 3)
    C = 3 * cJ - 6 * cK - (cJ + cK) ** 2
    cands = []
    for b in _quadratic_roots(A, B, C):
        if not EDGE_TOL < b < 0.5 - EDGE_TOL:
            continue
        a = (3 * b + cJ + cK) / (6 * b - 3)
        if EDGE_TOL < a < 0.5 - EDGE_TOL:
            cands.append((a, b))
    if not cands:
        raise NotInRangeError((Jm, Km))
    if len(cands) > 1 and abs(cands[0][1] - cands[1][1]) > 1e-12:
        log.warning("two admissible roots for (J, K)=(%r, %r): %r", Jm, Km, cands)
        raise AmbiguousRootError((Jm, Km), cands)
    a, b = cands[0]
    if polish:
        target = np.array([Jm, Km])
        theta = np.array([a, b])
        for _ in range(2):
            try:
                p = TwoPointParams(*theta)
            except DomainError:
                break
            step = np.linalg.solve(tp_phi_jacobian(p), np.array(tp_phi(p)) - target)
            cand = theta - step
            if not (0 < cand[0] < 0.5 and 0 < cand[1] < 0.5):
                break
            theta = cand
        a, b = theta
    return TwoPointParams(a, b)


def tp_partials(x, y, theta):
    """Right-hand partial derivatives ``(R1, R2)`` of the tail copula.

    ``R1 = Σ_{w < z} w H{w}``, ``R2 = Σ_{w > z} (1-w) H{w}`` with
    ``z = y / (x + y)``; an atom exactly at ``z`` enters neither sum.
    At the origin both are 0.
    """
    t = _coerce(theta)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    s = x + y
    with np.errstate(invalid="ignore", divide="ignore"):
        z = np.where(s > 0, y / np.where(s > 0, s, 1.0), np.nan)
    H = tp_spectral(t)
    w = H.locations
    m = H.masses
    zz = z[..., None]
    r1 = np.sum(np.where(w < zz, w * m, 0.0), axis=-1)
    r2 = np.sum(np.where(w > zz, (1 - w) * m, 0.0), axis=-1)
    origin = ~(s > 0)
    r1 = np.where(origin, 0.0, r1)
    r2 = np.where(origin, 0.0, r2)
    if r1.ndim == 0:
        return float(r1), float(r2)
    return r1, r2


def _factor_weights(alpha, nu):
    ua = alpha**nu
    ub = (1 - alpha) ** nu
    return ua / (ua + ub), ub / (ua + ub)


def factor_to_tp(alpha, beta, nu):
    """Spectral parameters ``(a, b)`` of the two-factor model.

    ``(X, Y) = (α Z1 + (1-α) Z2 + ε1, (1-β) Z1 + β Z2 + ε2)`` with factors of
    tail index ``nu`` and lighter-tailed noise.
    """
    if not (0 < alpha < 1 and 0 < beta < 1 and nu > 0):
        raise DomainError(f"need alpha, beta in (0, 1) and nu > 0, got {alpha}, {beta}, {nu}")
    x1, x2 = _factor_weights(alpha, nu)  # shares of Z1, Z2 in the tail of X
    y2, y1 = _factor_weights(beta, nu)  # shares of Z2, Z1 in the tail of Y
    q = x2 + y2
    a = x2 / q
    one_minus_b = x1 / (2 - q)
    return TwoPointParams(a, 1.0 - one_minus_b)


def tp_to_factor(theta, nu):
    """Loadings ``(α, β)`` such that :func:`factor_to_tp` returns ``θ``."""
    t = _coerce(theta)
    x2 = t.a * t.q  # (1-α)^ν / (α^ν + (1-α)^ν)
    y2 = t.q - x2  # β^ν / (β^ν + (1-β)^ν)
    if not (0 < x2 < 1 and 0 < y2 < 1):
        raise DomainError(f"θ={t} is not reachable by the factor model")
    ra = (x2 / (1 - x2)) ** (1.0 / nu)  # (1-α)/α
    rb = (y2 / (1 - y2)) ** (1.0 / nu)  # β/(1-β)
    return 1.0 / (1.0 + ra), rb / (1.0 + rb)


class TwoPointFamily(ModelFamily):
    name = "two-point"
    param_names = ("a", "b")
    lower = np.array([0.0, 0.0])
    upper = np.array([0.5, 0.5])
    has_closed_form_inverse = True
    has_spectral_atoms = True

    @property
    def default_g(self):
        return MomentMap.two_point()

    def params(self, theta):
        return _coerce(self.check(theta))

    def tail_copula(self, x, y, theta):
        return tp_R(x, y, self.params(theta))

    def stdf(self, x, y, theta):
        return tp_l(x, y, self.params(theta))

    def partials(self, x, y, theta):
        return tp_partials(x, y, self.params(theta))

    def spectral(self, theta):
        return tp_spectral(self.params(theta))

    def _phi_builtin(self, theta):
        return np.array(tp_phi(self.params(theta)))

    def _invert_builtin(self, moments):
        return tp_invert(*moments).as_array()

    def phi_jacobian(self, theta, g=None):
        if g is None or g == self.default_g:
            return tp_phi_jacobian(self.params(theta))
        return super().phi_jacobian(theta, g)
