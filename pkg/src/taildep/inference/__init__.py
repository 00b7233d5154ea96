"""Estimation, asymptotic covariance, Wald regions and goodness-of-fit testing."""

from taildep.inference.covariance import (
    CovarianceMatrix,
    CovMethod,
    closed_form_diagnostic,
    covariance_Sigma,
    sigma_pointwise,
    sigma_pointwise_symmetric,
)
from taildep.inference.estimate import EstimateResult, Status, estimate_from_moments, mom_estimate
from taildep.inference.field import GaussianFieldSample, simulate_limit_field, simulate_limit_fields
from taildep.inference.gof import GofResult, gof_statistic, gof_test, limit_draws
from taildep.inference.wald import WaldResult, chi2_ppf, chi2_sf, wald_matrix, wald_statistic

__all__ = [
    "CovarianceMatrix",
    "CovMethod",
    "closed_form_diagnostic",
    "covariance_Sigma",
    "sigma_pointwise",
    "sigma_pointwise_symmetric",
    "EstimateResult",
    "Status",
    "estimate_from_moments",
    "mom_estimate",
    "GaussianFieldSample",
    "simulate_limit_field",
    "simulate_limit_fields",
    "GofResult",
    "gof_statistic",
    "gof_test",
    "limit_draws",
    "WaldResult",
    "chi2_ppf",
    "chi2_sf",
    "wald_matrix",
    "wald_statistic",
]
