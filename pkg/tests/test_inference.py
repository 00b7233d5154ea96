import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from taildep._parallel import stream
from taildep.errors import DegenerateCovarianceError, NotInRangeError, PreconditionError, TailDepError
from taildep.inference import (
    CovMethod,
    Status,
    chi2_ppf,
    chi2_sf,
    covariance_Sigma,
    estimate_from_moments,
    gof_statistic,
    gof_test,
    limit_draws,
    mom_estimate,
    sigma_pointwise,
    sigma_pointwise_symmetric,
    simulate_limit_fields,
    wald_statistic,
)
from taildep.models import EllipticalFamily, TwoPointFamily
from taildep.simulate import EllipticalModelConfig, FactorModelConfig, sample_elliptical, sample_factor
from taildep.tail_core import EmpiricalSTDF, MomentMap, Sample, compute_ranks

TP, ELL = TwoPointFamily(), EllipticalFamily()
CAUCHY = EllipticalModelConfig("cauchy", 1.0)
FIG2 = FactorModelConfig.from_theta((0.3125, 0.3125))


def cauchy(n, seed):
    return sample_elliptical(CAUCHY, n, np.random.default_rng(seed))


# ---- estimation --------------------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), shift=st.floats(-5, 5), power=st.floats(0.2, 3))
def test_estimate_is_rank_invariant(seed, shift, power):
    s = sample_factor(FIG2, 300, np.random.default_rng(seed))
    # strictly increasing maps of each coordinate
    t = Sample(2.0 * np.cbrt(s.x) + shift, (s.y - s.y.min() + 1.0) ** power)
    a = mom_estimate(s, 40, TP)
    b = mom_estimate(t, 40, TP)
    assert a.status is b.status
    assert np.array_equal(a.moment_vector, b.moment_vector)
    assert np.array_equal(a.theta_hat, b.theta_hat, equal_nan=True)


def test_estimate_accepts_ranks_and_arrays():
    s = sample_factor(FIG2, 500, np.random.default_rng(0))
    a = mom_estimate(s, 50, TP)
    b = mom_estimate(compute_ranks(s), 50, TP)
    c = mom_estimate(np.column_stack([s.x, s.y]), 50, TP)
    assert np.array_equal(a.theta_hat, b.theta_hat) and np.array_equal(a.theta_hat, c.theta_hat)
    assert a.k == 50 and a.n == 500


@pytest.mark.parametrize("family,theta", [(TP, [0.125, 0.375]), (TP, [0.3, 0.05]), (ELL, [2.5])])
def test_plug_through_model_moments(family, theta):
    est = estimate_from_moments(family.phi(theta), family)
    assert est.ok and np.allclose(est.theta_hat, theta, atol=1e-6)


def test_plug_through_empirical_stdf_of_a_spectral_sample():
    # ranks of a sample with l̂ equal to the two-point model at every node j/k:
    # with n = 2k, place k points on each atom ray of the spectral measure
    theta = (0.25, 0.25)
    k = 400
    n = 2 * k
    t = np.arange(1, k + 1)
    # atom at w = 1/4 with mass 1 and at w = 3/4 with mass 1: points (w, 1 - w) / (i/k)
    x = np.concatenate([0.25 * k / t, 0.75 * k / t])
    y = np.concatenate([0.75 * k / t, 0.25 * k / t])
    est = mom_estimate(Sample(x, y), k, TP)
    assert est.ok
    assert est.n == n
    assert np.allclose(est.theta_hat, theta, atol=0.01)


def test_k_zero_is_a_precondition_error():
    with pytest.raises(PreconditionError):
        mom_estimate(cauchy(100, 0), 0, ELL)


def test_moment_map_dimension_must_match():
    with pytest.raises(PreconditionError):
        mom_estimate(cauchy(100, 0), 10, TP, MomentMap.triangle())


def test_failures_are_statuses():
    s = Sample(np.arange(50.0), np.arange(50.0))  # comonotone: l̂ = max(x, y), outside the open range
    est = mom_estimate(s, 10, TP)
    assert est.status is Status.NOT_IN_RANGE and np.all(np.isnan(est.theta_hat))
    with pytest.raises(NotInRangeError) as info:
        est.raise_for_status()
    assert info.value.estimate is est


# ---- covariance ----------------------------------------------------------------


def test_printed_covariance_formula_is_not_symmetric():
    rng = np.random.default_rng(0)
    x, y, u, v = rng.random((4, 200))
    theta = [0.125, 0.375]
    a = sigma_pointwise(x, y, u, v, theta, TP)
    b = sigma_pointwise(u, v, x, y, theta, TP)
    assert np.max(np.abs(a - b)) > 1e-3
    s1 = sigma_pointwise_symmetric(x, y, u, v, theta, TP)
    s2 = sigma_pointwise_symmetric(u, v, x, y, theta, TP)
    assert np.allclose(s1, s2, atol=1e-15)
    # the pointwise average of the printed formula is the direct expansion
    assert np.allclose(0.5 * (a + b), s1, atol=1e-14)


@pytest.mark.parametrize("family,theta", [(TP, [0.125, 0.375]), (ELL, [1.0]), (ELL, [5.0])])
def test_pointwise_variance_nonnegative(family, theta):
    rng = np.random.default_rng(1)
    x, y = rng.random((2, 100))
    assert np.all(sigma_pointwise(x, y, x, y, theta, family) >= -1e-14)


def test_pointwise_variance_at_one_one_matches_field():
    f = simulate_limit_fields(ELL, [1.0], 20, n_draws=5000, seed=2)
    b = f.B[:, -1, -1]
    var = float(sigma_pointwise(1.0, 1.0, 1.0, 1.0, [1.0], ELL))
    se = np.sqrt(np.var(b * b) / b.size)
    assert abs(np.mean(b * b) - var) < 3 * se


def test_simulated_sigma_symmetric_psd():
    s = covariance_Sigma([0.125, 0.375], TP, budget=2000, seed=3)
    assert s.method is CovMethod.SIMULATED
    assert np.allclose(s.sigma_mat, s.sigma_mat.T, atol=1e-10)
    assert np.linalg.eigvalsh(s.sigma_mat).min() >= -1e-8
    assert s.mc_stderr.shape == (2, 2) and np.all(s.mc_stderr > 0)


def test_simulated_sigma_seed_stability():
    a = covariance_Sigma([0.125, 0.375], TP, budget=2000, seed=1)
    b = covariance_Sigma([0.125, 0.375], TP, budget=2000, seed=2)
    joint = np.sqrt(a.mc_stderr**2 + b.mc_stderr**2)
    assert np.all(np.abs(a.sigma_mat - b.sigma_mat) < 3 * joint)


def test_simulated_sigma_reproducible():
    a = covariance_Sigma([1.0], ELL, budget=500, seed=9, workers=1)
    b = covariance_Sigma([1.0], ELL, budget=500, seed=9, workers=3)
    assert np.array_equal(a.sigma_mat, b.sigma_mat)


def test_elliptical_sigma_positive_scalar():
    s = covariance_Sigma([1.0], ELL, MomentMap.triangle(), budget=2000)
    assert s.sigma_mat.shape == (1, 1) and s.sigma_mat[0, 0] > 0


def test_closed_form_symmetrized():
    s = covariance_Sigma([0.125, 0.375], TP, method=CovMethod.CLOSED_FORM, m=16)
    assert np.allclose(s.sigma_mat, s.sigma_mat.T, atol=1e-10)
    raw = s.extras["unsymmetrized"]
    assert np.allclose(0.5 * (raw + raw.T), s.sigma_mat, atol=1e-15)


# ---- Wald ----------------------------------------------------------------------


def series_sf(x, p):
    """``P(χ²_p > x)`` from the power series of the lower incomplete gamma function."""
    a, z = p / 2.0, x / 2.0
    term = 1.0 / a
    total = term
    n = 1
    while term > 1e-17 * total:
        term *= z / (a + n)
        total += term
        n += 1
    return 1.0 - math.exp(a * math.log(z) - z - math.lgamma(a)) * total


@pytest.mark.parametrize("p", [1, 2])
@pytest.mark.parametrize("x", [0.01, 0.5, 1.0, 3.84, 5.99, 9.0])
def test_chi2_tail_against_series(p, x):
    assert chi2_sf(x, p) == pytest.approx(series_sf(x, p), rel=1e-6)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_chi2_quantile_inverts_tail(p):
    for level in (0.9, 0.95, 0.99):
        assert chi2_sf(chi2_ppf(level, p), p) == pytest.approx(1 - level, rel=1e-10)
    assert chi2_ppf(0.95, 1) == pytest.approx(3.841458820694124, abs=1e-12)
    assert chi2_sf(0.0, p) == 1.0


def test_wald_at_estimate_is_zero():
    est = mom_estimate(sample_factor(FIG2, 1000, np.random.default_rng(4)), 100, TP)
    w = wald_statistic(est, TP)
    assert w.stat == 0.0 and w.p_value == 1.0 and w.df == 2
    assert w.contains(est.theta_hat, est.theta_hat)


@settings(max_examples=20, deadline=None)
@given(a=st.floats(0.01, 0.49), b=st.floats(0.01, 0.49))
def test_wald_nonnegative(a, b):
    est = estimate_from_moments(TP.phi([0.2, 0.3]), TP, k=100, n=1000)
    sigma = covariance_Sigma(est.theta_hat, TP, budget=300, seed=0)
    w = wald_statistic(est, TP, theta_ref=[a, b], sigma=sigma)
    assert w.stat >= 0 and 0 <= w.p_value <= 1


def test_wald_needs_ok_estimate():
    est = estimate_from_moments([0.125, 0.125], TP)
    with pytest.raises(PreconditionError):
        wald_statistic(est, TP)


def test_wald_singular_sigma():
    est = estimate_from_moments(TP.phi([0.2, 0.3]), TP, k=100, n=1000)
    with pytest.raises(DegenerateCovarianceError, match="non-singular"):
        wald_statistic(est, TP, sigma=np.ones((2, 2)))


def test_wald_coverage_under_the_true_model():
    theta0 = FIG2.true_theta
    covered = ran = 0
    for i in range(200):
        est = mom_estimate(sample_factor(FIG2, 1000, stream(0, 2, i)), 100, TP)
        if not est.ok:
            continue
        ran += 1
        covered += not wald_statistic(est, TP, theta_ref=theta0, seed=i).reject(0.95)
    assert ran >= 190
    assert 0.85 <= covered / ran <= 0.99


# ---- goodness of fit -------------------------------------------------------------


class ModelAsEmpirical:
    """Stand-in for an empirical STDF whose grid values are ``l(·; θ) + c h``."""

    def __init__(self, family, theta, k=100, c=0.0):
        self.family, self.theta, self.k, self.c = family, theta, k, c

    def grid(self, xs, ys):
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        return self.family.stdf(X, Y, self.theta) + self.c * np.sin(3 * X) * Y


def test_gof_statistic_zero_for_exact_model():
    e = ModelAsEmpirical(TP, [0.2, 0.3])
    assert gof_statistic(e, TP, [0.2, 0.3], rule="midpoint") == 0.0


def test_gof_statistic_scales_quadratically():
    s1 = gof_statistic(ModelAsEmpirical(ELL, [2.0], c=0.1), ELL, [2.0], rule="midpoint")
    s3 = gof_statistic(ModelAsEmpirical(ELL, [2.0], c=0.3), ELL, [2.0], rule="midpoint")
    assert s3 == pytest.approx(9 * s1, rel=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_gof_statistic_richardson(seed):
    s = sample_factor(FIG2, 1000, np.random.default_rng(seed))
    e = EmpiricalSTDF(compute_ranks(s), 100)
    theta = mom_estimate(s, 100, TP).theta_hat
    a = gof_statistic(e, TP, theta, m=200, check=False)
    b = gof_statistic(e, TP, theta, m=400, check=False)
    assert abs(a - b) <= 0.01 * a


def test_gof_statistic_aligned_agrees_with_fine_midpoint():
    s = cauchy(1000, 3)
    e = EmpiricalSTDF(compute_ranks(s), 100)
    a = gof_statistic(e, ELL, [1.2], check=False)
    b = gof_statistic(e, ELL, [1.2], m=1600, check=False, rule="midpoint")
    assert abs(a - b) <= 0.01 * a


def test_gof_requires_positive_sims():
    with pytest.raises(PreconditionError):
        gof_test(cauchy(500, 0), 50, ELL, n_sims=0)


def test_gof_estimation_failure_propagates():
    s = Sample(np.arange(60.0), np.arange(60.0))
    with pytest.raises(NotInRangeError) as info:
        gof_test(s, 10, ELL, n_sims=10)
    assert info.value.estimate.status is Status.NOT_IN_RANGE


def test_gof_result_fields_and_determinism():
    s = cauchy(1000, 5)
    a = gof_test(s, 100, ELL, n_sims=300, rng=8)
    b = gof_test(s, 100, ELL, n_sims=300, rng=8, workers=2)
    assert a.statistic == b.statistic and a.critical_values == b.critical_values
    assert 0 <= a.p_value <= 1 and a.n_limit_sims == 300
    cv = [a.critical_values[lv] for lv in (0.90, 0.95, 0.99)]
    assert cv == sorted(cv)
    assert a.reject(0.90) == (a.statistic > cv[0])


def test_gof_statistic_median_matches_limit_under_null():
    stats = []
    i = 0
    while len(stats) < 40:
        try:
            res = gof_test(cauchy(1000, 1000 + i), 100, ELL, n_sims=200, rng=i)
            stats.append(res.statistic)
        except TailDepError:
            pass
        i += 1
    limit = limit_draws(ELL, [1.0], n_sims=2000, seed=1)
    ratio = np.median(stats) / np.median(limit)
    assert 1 / 3 <= ratio <= 3


def test_gof_power_two_point_data_elliptical_family():
    # asymmetric two-point design: the spectral atoms sit at 0.01 and 0.77
    cfg = FactorModelConfig.from_theta((0.01, 0.23))
    reject = ran = 0
    for i in range(40):
        try:
            res = gof_test(sample_factor(cfg, 1000, stream(99, 2, i)), 100, ELL, rng=i)
        except TailDepError:
            continue
        ran += 1
        reject += res.reject(0.95)
    assert ran > 0 and reject / ran >= 0.5, f"rejected {reject} of {ran} completed tests"
