"""Simulation of the Gaussian limit processes ``W``, ``W1``, ``W2``, ``B`` and ``B̃``.

``W`` is realized on the nodes ``t_j = j/m`` of ``[0, 1]^2`` by the white-noise
cell method. The grid is augmented by one strip standing for ``∞`` in each
direction, using ``R(x, ∞) = x`` and ``R(∞, y) = y``. Cell
``(x1, x2] x (y1, y2]`` gets an independent centred Gaussian of variance

    R(x2, y2) - R(x1, y2) - R(x2, y1) + R(x1, y1),

and ``W`` is the two-dimensional cumulative sum, so that
``E W(x1, y1) W(x2, y2) = R(x1 ∧ x2, y1 ∧ y2)`` holds exactly on the nodes.
Integrals over the unit square use the trapezoidal rule on the nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from taildep._parallel import STREAM_FIELD, parallel_map, stream
from taildep.errors import ModelError, PreconditionError

__all__ = [
    "GaussianFieldSample",
    "FieldPlan",
    "make_plan",
    "simulate_limit_field",
    "simulate_limit_fields",
]

GRID_MIN, GRID_MAX = 10, 60
_BLOCK = 128


@dataclass(frozen=True)
class GaussianFieldSample:
    """One draw (or a stack of draws along a leading axis) of the limit processes."""

    grid: np.ndarray
    W: np.ndarray
    W1: np.ndarray
    W2: np.ndarray
    B: np.ndarray
    B_tilde: np.ndarray


@dataclass(frozen=True)
class FieldPlan:
    """Everything about the limit field that depends on ``(family, θ, m, g)`` only."""

    m: int
    nodes: np.ndarray
    R: np.ndarray  # R on the nodes, (m+1, m+1)
    sd: np.ndarray  # cell standard deviations including the ∞ strips, (m+1, m+1)
    R1: np.ndarray
    R2: np.ndarray
    weights: np.ndarray  # trapezoid weights on the nodes, (m+1, m+1)
    gw: np.ndarray  # g(t_i, t_j) * weights, (m+1, m+1, p)


def trapezoid_weights(m):
    w = np.full(m + 1, 1.0 / m)
    w[0] = w[-1] = 0.5 / m
    return np.outer(w, w)


def cell_masses(R, nodes):
    """Control-measure masses of the cells, with the ∞ strips in the last row/column."""
    m = nodes.size - 1
    ext = np.zeros((m + 2, m + 2))
    ext[: m + 1, : m + 1] = R
    ext[: m + 1, m + 1] = nodes  # R(x, ∞) = x
    ext[m + 1, : m + 1] = nodes  # R(∞, y) = y
    mass = ext[1:, 1:] - ext[:-1, 1:] - ext[1:, :-1] + ext[:-1, :-1]
    mass[m, m] = 0.0  # the (∞, ∞) corner is not part of the index set
    return mass


def make_plan(family, theta, grid_m, g=None):
    if not GRID_MIN <= grid_m <= GRID_MAX:
        raise PreconditionError(f"grid_m must be in [{GRID_MIN}, {GRID_MAX}], got {grid_m}")
    g = g or family.default_g
    theta = family.check(theta)
    nodes = np.linspace(0.0, 1.0, grid_m + 1)
    X, Y = np.meshgrid(nodes, nodes, indexing="ij")
    R = np.asarray(family.tail_copula(X, Y, theta), dtype=float)
    mass = cell_masses(R, nodes)
    if mass.min() < -1e-10:
        raise ModelError(
            f"{family.name}: negative cell mass {mass.min():.3e}; R is not 2-increasing at θ={theta}"
        )
    R1, R2 = family.partials(X, Y, theta)
    w = trapezoid_weights(grid_m)
    gw = np.asarray(g(X, Y), dtype=float) * w[..., None]
    return FieldPlan(
        m=grid_m,
        nodes=nodes,
        R=R,
        sd=np.sqrt(np.clip(mass, 0.0, None)),
        R1=np.asarray(R1, dtype=float),
        R2=np.asarray(R2, dtype=float),
        weights=w,
        gw=gw,
    )


def _fields_from_noise(plan, Z):
    """Map standard normal cell variables ``Z`` (..., m+1, m+1) to the processes."""
    m = plan.m
    C = np.cumsum(np.cumsum(plan.sd * Z, axis=-2), axis=-1)
    lead = Z.shape[:-2]
    W = np.zeros(lead + (m + 1, m + 1))
    W[..., 1:, 1:] = C[..., :m, :m]
    W1 = np.zeros(lead + (m + 1,))
    W2 = np.zeros(lead + (m + 1,))
    W1[..., 1:] = C[..., :m, m]
    W2[..., 1:] = C[..., m, :m]
    B = W - plan.R1 * W1[..., :, None] - plan.R2 * W2[..., None, :]
    B_tilde = np.einsum("...ij,ijp->...p", B, plan.gw)
    return W, W1, W2, B, B_tilde


def simulate_limit_field(family, theta, grid_m, g=None, rng=None):
    """Draw one realization of ``(W, W1, W2, B, B̃)`` on an ``(m+1) x (m+1)`` node grid."""
    plan = make_plan(family, theta, grid_m, g)
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    Z = rng.standard_normal((grid_m + 1, grid_m + 1))
    return GaussianFieldSample(plan.nodes, *_fields_from_noise(plan, Z))


def _noise_block(plan, seed, start, stop):
    shape = (plan.m + 1, plan.m + 1)
    return np.stack([stream(seed, STREAM_FIELD, i).standard_normal(shape) for i in range(start, stop)])


def map_field_draws(plan, n_draws, seed, reduce, workers=None):
    """Apply ``reduce(plan, W, W1, W2, B, B_tilde)`` to blocks of draws; concatenate in order.

    Draw ``i`` always uses the stream ``(seed, i)``, so results do not depend
    on the block size or on the number of workers.
    """
    blocks = [(s, min(s + _BLOCK, n_draws)) for s in range(0, n_draws, _BLOCK)]

    def run(block):
        Z = _noise_block(plan, seed, *block)
        return reduce(plan, *_fields_from_noise(plan, Z))

    parts = parallel_map(run, blocks, workers)
    return np.concatenate(parts, axis=0) if parts else np.empty((0,))


def simulate_limit_fields(family, theta, grid_m, g=None, n_draws=1, seed=0, workers=None):
    """``n_draws`` independent draws stacked along a leading axis."""
    plan = make_plan(family, theta, grid_m, g)

    def keep(plan, W, W1, W2, B, Bt):
        return np.concatenate(
            [W.reshape(len(W), -1), W1, W2, B.reshape(len(B), -1), Bt], axis=1
        )

    flat = map_field_draws(plan, n_draws, seed, keep, workers)
    m1 = grid_m + 1
    sizes = np.cumsum([m1 * m1, m1, m1, m1 * m1])
    W, W1, W2, B, Bt = np.split(flat, sizes, axis=1)
    return GaussianFieldSample(
        plan.nodes, W.reshape(-1, m1, m1), W1, W2, B.reshape(-1, m1, m1), Bt
    )
