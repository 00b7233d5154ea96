"""Common interface for parametric families of stable tail dependence functions."""

from __future__ import annotations

import abc
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from taildep.errors import DomainError, NotInRangeError
from taildep.quadrature import grid_quadrature
from taildep.tail_core import MomentMap

__all__ = ["SpectralMeasure", "ModelFamily"]


@dataclass(frozen=True)
class SpectralMeasure:
    """Finite measure on ``[0, 1]`` given by weighted atoms."""

    locations: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.locations, dtype=float).ravel()
        m = np.asarray(self.masses, dtype=float).ravel()
        if w.shape != m.shape:
            raise ValueError("locations and masses must have equal length")
        if np.any((w < 0) | (w > 1)) or np.any(m <= 0):
            raise ValueError("atoms must lie in [0, 1] with positive mass")
        object.__setattr__(self, "locations", w)
        object.__setattr__(self, "masses", m)

    @property
    def atoms(self):
        return list(zip(self.locations.tolist(), self.masses.tolist()))

    @property
    def total_mass(self):
        return float(self.masses.sum())

    def moments(self):
        """``(∫ w dH, ∫ (1-w) dH)``; both equal 1 for a valid spectral measure."""
        return (
            float(np.dot(self.locations, self.masses)),
            float(np.dot(1.0 - self.locations, self.masses)),
        )

    def is_valid(self, tol=1e-12):
        m1, m2 = self.moments()
        return abs(m1 - 1.0) <= tol and abs(m2 - 1.0) <= tol

    def stdf(self, x, y):
        x = np.asarray(x, dtype=float)[..., None]
        y = np.asarray(y, dtype=float)[..., None]
        w = self.locations
        return np.sum(self.masses * np.maximum(w * x, (1 - w) * y), axis=-1)

    def tail_copula(self, x, y):
        x = np.asarray(x, dtype=float)[..., None]
        y = np.asarray(y, dtype=float)[..., None]
        w = self.locations
        return np.sum(self.masses * np.minimum(w * x, (1 - w) * y), axis=-1)


class ModelFamily(abc.ABC):
    """A parametric family ``θ -> l(·, ·; θ)`` over an open box of parameters.

    Subclasses implement the tail copula ``R``, its right-hand partial
    derivatives, and the moment map for their built-in ``g``. Everything else
    (``l``, derivatives in ``θ``, inversion for other ``g``) has a generic
    default here.
    """

    name: str = ""
    param_names: tuple = ()
    lower: np.ndarray
    upper: np.ndarray
    has_closed_form_inverse = False
    has_spectral_atoms = False
    quad_m = 400

    @property
    def p(self):
        return len(self.param_names)

    @property
    @abc.abstractmethod
    def default_g(self) -> MomentMap: ...

    # -- parameters -------------------------------------------------------
    def check(self, theta):
        """Return ``θ`` as a float vector, raising :class:`DomainError` outside the box."""
        if hasattr(theta, "as_array"):
            theta = theta.as_array()
        t = np.atleast_1d(np.asarray(theta, dtype=float))
        if t.shape != (self.p,):
            raise DomainError(f"{self.name}: expected {self.p} parameters, got shape {t.shape}")
        if not np.all((t > self.lower) & (t < self.upper)):
            raise DomainError(
                f"{self.name}: θ={t.tolist()} outside ({self.lower.tolist()}, {self.upper.tolist()})"
            )
        return t

    @abc.abstractmethod
    def params(self, theta): ...

    # -- the function itself ----------------------------------------------
    @abc.abstractmethod
    def tail_copula(self, x, y, theta): ...

    @abc.abstractmethod
    def partials(self, x, y, theta):
        """Right-hand partial derivatives ``(R1, R2)`` of the tail copula."""

    def stdf(self, x, y, theta):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return x + y - self.tail_copula(x, y, theta)

    # -- moment map -------------------------------------------------------
    def _phi_builtin(self, theta):
        raise NotImplementedError

    def _invert_builtin(self, moments):
        raise NotImplementedError

    def phi(self, theta, g=None):
        g = g or self.default_g
        if g == self.default_g:
            return np.atleast_1d(self._phi_builtin(theta))
        theta = self.check(theta)
        return np.atleast_1d(
            grid_quadrature(
                lambda x, y: g(x, y) * self.stdf(x, y, theta)[..., None], self.quad_m
            )
        )

    def invert(self, moments, g=None):
        """Solve ``phi(θ) = moments`` for ``θ`` in the open box.

        Raises :class:`NotInRangeError` when no admissible solution exists.
        """
        g = g or self.default_g
        moments = np.atleast_1d(np.asarray(moments, dtype=float))
        if not np.all(np.isfinite(moments)):
            raise NotInRangeError(moments)
        if g == self.default_g and self.has_closed_form_inverse:
            return self._invert_builtin(moments)
        return self._invert_numeric(moments, g)

    def _invert_numeric(self, moments, g):
        span = self.upper - self.lower
        lo = self.lower + 1e-9 * span
        hi = self.upper - 1e-9 * span
        x0 = 0.5 * (lo + hi)
        sol = optimize.least_squares(
            lambda t: self.phi(t, g) - moments, x0, bounds=(lo, hi), xtol=1e-14, ftol=1e-14, gtol=1e-14
        )
        if not sol.success or np.max(np.abs(sol.fun)) > 1e-8:
            raise NotInRangeError(moments)
        return sol.x

    # -- derivatives in θ ---------------------------------------------------
    def _fd_steps(self, theta):
        return 1e-5 * np.maximum(1.0, np.abs(theta))

    def _fd(self, fun, theta):
        """Central differences of ``fun`` in each coordinate of ``θ``.

        Falls back to a one-sided difference next to the boundary of the box.
        Returns an array with a trailing axis of length ``p``.
        """
        theta = self.check(theta)
        cols = []
        for j, h in enumerate(self._fd_steps(theta)):
            up = theta.copy()
            dn = theta.copy()
            up[j] += h
            dn[j] -= h
            up_ok = up[j] < self.upper[j]
            dn_ok = dn[j] > self.lower[j]
            if up_ok and dn_ok:
                cols.append((fun(up) - fun(dn)) / (2 * h))
            elif up_ok:
                cols.append((fun(up) - fun(theta)) / h)
            else:
                cols.append((fun(theta) - fun(dn)) / h)
        return np.stack([np.asarray(c, dtype=float) for c in cols], axis=-1)

    def phi_jacobian(self, theta, g=None):
        """``p x p`` matrix ``dφ/dθ`` (rows: moments, columns: parameters)."""
        return self._fd(lambda t: self.phi(t, g), theta)

    def stdf_gradient(self, x, y, theta):
        """Gradient of ``θ -> l(x, y; θ)``; trailing axis of length ``p``."""
        return self._fd(lambda t: self.stdf(x, y, t), theta)

    def __repr__(self):
        return f"{type(self).__name__}()"
