"""Samplers for the two-factor model and the elliptical ``Z U`` model."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from taildep.errors import DomainError
from taildep.models.two_point import TwoPointParams, factor_to_tp, tp_spectral, tp_to_factor
from taildep.tail_core import Sample

__all__ = [
    "FactorLaw",
    "Generator",
    "FactorModelConfig",
    "EllipticalModelConfig",
    "open_uniform",
    "frechet",
    "t2",
    "cauchy_radius",
    "sample_factor",
    "sample_elliptical",
    "sample_max_linear",
]

_TWO53 = float(2**53)


def open_uniform(rng, size):
    """Uniforms on the open interval ``(0, 1)``: midpoints of a ``2^-53`` lattice."""
    return (rng.integers(0, 2**53, size=size, dtype=np.int64) + 0.5) / _TWO53


def frechet(rng, size, nu=1.0):
    """Fréchet(ν) variates by inversion of ``exp(-z^-ν)``."""
    return (-np.log(open_uniform(rng, size))) ** (-1.0 / nu)


def t2(rng, size):
    """Student t with two degrees of freedom via its closed-form quantile."""
    p = open_uniform(rng, size)
    return (2.0 * p - 1.0) / np.sqrt(2.0 * p * (1.0 - p))


def cauchy_radius(rng, size):
    """Radius with ``P(Z > z) = (1 + z²)^{-1/2}``, the bivariate Cauchy generator."""
    u = open_uniform(rng, size)
    return np.sqrt(1.0 / (u * u) - 1.0)


class FactorLaw(enum.Enum):
    FRECHET1 = "frechet1"
    T2 = "t2"

    @property
    def tail_index(self):
        return 1.0 if self is FactorLaw.FRECHET1 else 2.0


# (factor law, noise sd) pairs used in the simulation studies
CATALOG = {(FactorLaw.FRECHET1, 1.0), (FactorLaw.T2, 0.5)}


@dataclass(frozen=True)
class FactorModelConfig:
    """``(X, Y) = (α Z1 + (1-α) Z2 + ε1, (1-β) Z1 + β Z2 + ε2)``."""

    alpha: float
    beta: float
    factor_law: FactorLaw = FactorLaw.FRECHET1
    noise_sd: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "factor_law", FactorLaw(self.factor_law))
        if not (0 < self.alpha < 1 and 0 < self.beta < 1):
            raise DomainError(f"loadings must lie in (0, 1), got {self.alpha}, {self.beta}")
        if (self.factor_law, float(self.noise_sd)) not in CATALOG:
            raise DomainError(
                f"unsupported combination {self.factor_law.value} with noise sd {self.noise_sd}; "
                "use frechet1 with sd 1 or t2 with sd 0.5"
            )

    @property
    def tail_nu(self):
        return self.factor_law.tail_index

    @property
    def true_theta(self):
        t = factor_to_tp(self.alpha, self.beta, self.tail_nu)
        return np.array([t.a, t.b])

    @classmethod
    def from_theta(cls, theta, factor_law=FactorLaw.FRECHET1, noise_sd=None):
        """Loadings that induce the two-point parameter ``theta``."""
        law = FactorLaw(factor_law)
        if noise_sd is None:
            noise_sd = 1.0 if law is FactorLaw.FRECHET1 else 0.5
        alpha, beta = tp_to_factor(TwoPointParams(*theta), law.tail_index)
        return cls(alpha, beta, law, noise_sd)


def sample_factor(cfg, n, rng):
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    z = frechet(rng, (2, n)) if cfg.factor_law is FactorLaw.FRECHET1 else t2(rng, (2, n))
    eps = cfg.noise_sd * rng.standard_normal((2, n))
    x = cfg.alpha * z[0] + (1.0 - cfg.alpha) * z[1] + eps[0]
    y = (1.0 - cfg.beta) * z[0] + cfg.beta * z[1] + eps[1]
    return Sample(x, y)


class Generator(enum.Enum):
    CAUCHY = "cauchy"
    FRECHET = "frechet"


@dataclass(frozen=True)
class EllipticalModelConfig:
    """Radial model ``(X, Y) = Z (cos Θ, sin Θ)`` with Θ uniform and ``Z > 0``."""

    generator: Generator = Generator.CAUCHY
    nu: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "generator", Generator(self.generator))
        if self.generator is Generator.CAUCHY and self.nu != 1.0:
            raise DomainError("the Cauchy generator has tail index 1")
        if not self.nu > 0:
            raise DomainError(f"tail index must be positive, got {self.nu}")

    @property
    def true_theta(self):
        return np.array([float(self.nu)])


def sample_elliptical(cfg, n, rng):
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    if cfg.generator is Generator.CAUCHY:
        z = cauchy_radius(rng, n)
    else:
        z = frechet(rng, n, cfg.nu)
    angle = 2.0 * np.pi * (rng.integers(0, 2**53, size=n, dtype=np.int64) / _TWO53)
    return Sample(z * np.cos(angle), z * np.sin(angle))


def sample_max_linear(theta, n, rng):
    """Max-linear sample whose tail dependence is exactly the two-point model ``theta``.

    With spectral atoms ``w_j`` of mass ``m_j`` and i.i.d. Fréchet(1) factors,
    ``X = max_j m_j w_j Z_j`` and ``Y = max_j m_j (1 - w_j) Z_j`` have standard
    Fréchet margins and stable tail dependence function
    ``sum_j m_j max(w_j x, (1 - w_j) y)``.
    """
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    H = tp_spectral(theta)
    z = frechet(rng, (H.masses.size, n))
    x = np.max((H.masses * H.locations)[:, None] * z, axis=0)
    y = np.max((H.masses * (1.0 - H.locations))[:, None] * z, axis=0)
    return Sample(x, y)
