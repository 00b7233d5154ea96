"""Wald statistics and confidence regions for the moment estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from taildep.errors import DegenerateCovarianceError, PreconditionError
from taildep.inference.covariance import CovMethod, covariance_Sigma

__all__ = ["chi2_sf", "chi2_ppf", "WaldResult", "wald_matrix", "wald_statistic"]


def chi2_sf(x, p):
    """Upper tail ``P(χ²_p > x)``; closed forms for ``p = 1, 2``."""
    x = float(x)
    if x <= 0:
        return 1.0
    if p == 1:
        return math.erfc(math.sqrt(x / 2.0))
    if p == 2:
        return math.exp(-x / 2.0)
    return float(special.gammaincc(p / 2.0, x / 2.0))


def chi2_ppf(level, p):
    """Quantile ``q`` with ``P(χ²_p <= q) = level``."""
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    if p == 1:
        return 2.0 * float(special.erfcinv(1.0 - level)) ** 2
    if p == 2:
        return -2.0 * math.log1p(-level)
    return 2.0 * float(special.gammainccinv(p / 2.0, 1.0 - level))


@dataclass(frozen=True)
class WaldResult:
    stat: float
    p_value: float
    df: int
    matrix: np.ndarray  # k Dφᵀ Σ⁻¹ Dφ at θ̂

    def reject(self, level=0.95):
        return self.stat > chi2_ppf(level, self.df)

    def contains(self, theta_hat, theta, level=0.95):
        """Whether ``theta`` lies in the Wald confidence region around ``theta_hat``."""
        d = np.asarray(theta, dtype=float) - np.asarray(theta_hat, dtype=float)
        return float(d @ self.matrix @ d) <= chi2_ppf(level, self.df)


def wald_matrix(est, family, g=None, sigma=None, seed=0, **cov_kw):
    """``k Dφ(θ̂)ᵀ Σ(θ̂)⁻¹ Dφ(θ̂)``, the quadratic form of the Wald region."""
    if not est.ok:
        raise PreconditionError(f"Wald statistic needs a successful estimate, status={est.status.value}")
    theta = est.theta_hat
    if sigma is None:
        sigma = covariance_Sigma(theta, family, g, CovMethod.SIMULATED, seed=seed, **cov_kw)
    S = np.asarray(getattr(sigma, "sigma_mat", sigma), dtype=float)
    D = np.atleast_2d(family.phi_jacobian(theta, g))
    try:
        cond = np.linalg.cond(S)
        if not np.isfinite(cond) or cond > 1e12:
            raise np.linalg.LinAlgError
        Sinv_D = np.linalg.solve(S, D)
    except np.linalg.LinAlgError:
        raise DegenerateCovarianceError(
            "Σ(θ̂) is singular; the χ² limit of the Wald statistic requires a non-singular Σ"
        ) from None
    return est.k * D.T @ Sinv_D


def wald_statistic(est, family, g=None, theta_ref=None, sigma=None, seed=0, **cov_kw):
    """Wald statistic ``k (θ̂-θ0)ᵀ Dφᵀ Σ⁻¹ Dφ (θ̂-θ0)`` and its ``χ²_p`` p-value.

    ``theta_ref`` defaults to ``θ̂`` itself (statistic 0); the returned
    matrix can be used to trace confidence regions.
    """
    Q = wald_matrix(est, family, g, sigma, seed, **cov_kw)
    ref = est.theta_hat if theta_ref is None else family.check(theta_ref)
    d = est.theta_hat - ref
    stat = max(float(d @ Q @ d), 0.0)
    return WaldResult(stat, chi2_sf(stat, family.p), family.p, Q)
