"""Method-of-moments estimation of the parameter of a tail dependence family."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from taildep.errors import AmbiguousRootError, NotInRangeError, PreconditionError
from taildep.tail_core import EmpiricalSTDF, RankData, Sample, compute_ranks, integrate_g_empirical

__all__ = ["Status", "EstimateResult", "mom_estimate", "estimate_from_moments"]


class Status(enum.Enum):
    OK = "OK"
    NOT_IN_RANGE = "NOT_IN_RANGE"
    AMBIGUOUS = "AMBIGUOUS"


@dataclass(frozen=True)
class EstimateResult:
    theta_hat: np.ndarray
    moment_vector: np.ndarray
    k: int
    n: int
    status: Status
    message: str = ""
    candidates: Optional[list] = None

    @property
    def ok(self):
        return self.status is Status.OK

    def raise_for_status(self):
        """Re-raise the inversion failure recorded in ``status``."""
        if self.status is Status.NOT_IN_RANGE:
            err = NotInRangeError(tuple(self.moment_vector.tolist()), self.message or None)
        elif self.status is Status.AMBIGUOUS:
            err = AmbiguousRootError(tuple(self.moment_vector.tolist()), self.candidates or [])
        else:
            return self
        err.estimate = self
        raise err


def estimate_from_moments(moments, family, g=None, k=0, n=0):
    """Invert ``family``'s moment map at ``moments`` and wrap the outcome."""
    moments = np.atleast_1d(np.asarray(moments, dtype=float))
    nan = np.full(family.p, np.nan)
    try:
        theta = family.invert(moments, g)
    except NotInRangeError as exc:
        return EstimateResult(nan, moments, k, n, Status.NOT_IN_RANGE, str(exc))
    except AmbiguousRootError as exc:
        return EstimateResult(nan, moments, k, n, Status.AMBIGUOUS, str(exc), list(exc.candidates))
    return EstimateResult(np.asarray(theta, dtype=float), moments, k, n, Status.OK)


def as_ranks(sample):
    """Accept a :class:`Sample`, :class:`RankData` or an ``(n, 2)`` array."""
    if isinstance(sample, RankData):
        return sample
    if not isinstance(sample, Sample):
        sample = Sample.from_pairs(sample)
    return compute_ranks(sample)


def mom_estimate(sample, k, family, g=None):
    """Method-of-moments estimate ``θ̂ = φ^{-1}(∬ g l̂_n)``.

    Parameters
    ----------
    sample : Sample, RankData or array of shape (n, 2)
    k : int
        Number of upper order statistics, ``1 <= k <= n``.
    family : ModelFamily
    g : MomentMap, optional
        Defaults to the family's built-in moment map.

    Returns
    -------
    EstimateResult
        Inversion failures are reported through ``status``, not raised.
    """
    g = g or family.default_g
    if g.p != family.p:
        raise PreconditionError(f"moment map has dimension {g.p}, family has {family.p} parameters")
    ranks = as_ranks(sample)
    e = EmpiricalSTDF(ranks, k)
    moments = integrate_g_empirical(e, g)
    return estimate_from_moments(moments, family, g, e.k, ranks.n)
