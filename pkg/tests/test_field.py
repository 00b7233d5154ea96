import numpy as np
import pytest

from taildep.errors import ModelError, PreconditionError
from taildep.inference import simulate_limit_field, simulate_limit_fields
from taildep.inference.field import cell_masses, make_plan
from taildep.models import EllipticalFamily, TwoPointFamily

CASES = [(TwoPointFamily(), [0.125, 0.375]), (EllipticalFamily(), [1.0])]
IDS = ["two-point", "elliptical"]
M = 20
POINTS = [(i, j) for i in (5, 10, 20) for j in (5, 10, 20)]  # node indices, t = i/M


@pytest.fixture(scope="module", params=range(len(CASES)), ids=IDS)
def draws(request):
    family, theta = CASES[request.param]
    return family, theta, simulate_limit_fields(family, theta, M, n_draws=5000, seed=11)


def test_variance_of_W_matches_R(draws):
    family, theta, f = draws
    for i, j in POINTS:
        w = f.W[:, i, j]
        r = float(family.tail_copula(i / M, j / M, theta))
        # the second moment of a centred Gaussian has stderr sqrt(2) var / sqrt(n)
        se = np.sqrt(2.0) * r / np.sqrt(w.size)
        assert abs(np.mean(w * w) - r) < 3 * se, (i, j)


def test_W_covariance_is_R_of_the_minimum(draws):
    family, theta, f = draws
    a, b = f.W[:, 10, 20], f.W[:, 20, 10]
    r = float(family.tail_copula(0.5, 0.5, theta))
    se = np.sqrt(np.var(a * b) / a.size)
    assert abs(np.mean(a * b) - r) < 3 * se


def test_margins_have_independent_increments(draws):
    _, _, f = draws
    inc = np.diff(f.W1, axis=1)
    n = inc.shape[0]
    # every increment has variance 1/M
    assert np.allclose(inc.var(axis=0), 1.0 / M, atol=4 * np.sqrt(2.0 / n) / M)
    c = np.corrcoef(inc[:, 3], inc[:, 11])[0, 1]
    assert abs(c) < 4 / np.sqrt(n)
    assert np.allclose(f.W1[:, -1].var(), 1.0, atol=0.08)


def test_B_is_W_minus_projection(draws):
    family, theta, f = draws
    X, Y = np.meshgrid(f.grid, f.grid, indexing="ij")
    r1, r2 = family.partials(X, Y, theta)
    B = f.W - r1 * f.W1[:, :, None] - r2 * f.W2[:, None, :]
    assert np.allclose(B, f.B, atol=1e-12)


def test_B_tilde_is_trapezoid_integral(draws):
    family, theta, f = draws
    X, Y = np.meshgrid(f.grid, f.grid, indexing="ij")
    G = family.default_g(X, Y)
    w = np.full(M + 1, 1.0 / M)
    w[[0, -1]] /= 2
    expected = np.einsum("dij,ijp,i,j->dp", f.B, G, w, w)
    assert np.allclose(expected, f.B_tilde, atol=1e-12)


def test_B_degenerates_near_the_axis():
    fam = EllipticalFamily()
    f = simulate_limit_fields(fam, [1.0], 30, n_draws=4000, seed=5)
    assert f.B[:, :, 1].var(axis=0).max() <= 1e-2
    assert np.all(f.B[:, :, 0] == 0.0)


def test_cell_masses_nonnegative_and_sum():
    fam = TwoPointFamily()
    nodes = np.linspace(0, 1, 11)
    X, Y = np.meshgrid(nodes, nodes, indexing="ij")
    mass = cell_masses(fam.tail_copula(X, Y, [0.2, 0.3]), nodes)
    assert mass.min() >= -1e-15
    # the strip in each direction carries total mass 1 = R(1, ∞) = R(∞, 1)
    assert mass[:-1, :].sum() == pytest.approx(1.0, abs=1e-12)
    assert mass[:, :-1].sum() == pytest.approx(1.0, abs=1e-12)


def test_negative_mass_is_a_model_error():
    class Broken(TwoPointFamily):
        def tail_copula(self, x, y, theta):
            return np.minimum(x, y) * (1.2 - np.maximum(x, y))

    with pytest.raises(ModelError):
        make_plan(Broken(), [0.2, 0.2], 10)


@pytest.mark.parametrize("m", [9, 61])
def test_grid_size_range(m):
    with pytest.raises(PreconditionError):
        simulate_limit_field(TwoPointFamily(), [0.2, 0.2], m)


def test_single_draw_shapes():
    f = simulate_limit_field(EllipticalFamily(), [2.0], 12, rng=3)
    assert f.W.shape == (13, 13) and f.W1.shape == (13,) and f.B_tilde.shape == (1,)
    assert f.W[0, 0] == 0.0 and f.W1[0] == 0.0


def test_draws_do_not_depend_on_worker_count():
    fam = TwoPointFamily()
    one = simulate_limit_fields(fam, [0.2, 0.3], 15, n_draws=300, seed=4, workers=1)
    four = simulate_limit_fields(fam, [0.2, 0.3], 15, n_draws=300, seed=4, workers=4)
    assert np.array_equal(one.W, four.W) and np.array_equal(one.B_tilde, four.B_tilde)
    # a prefix of a longer run is the shorter run
    short = simulate_limit_fields(fam, [0.2, 0.3], 15, n_draws=100, seed=4)
    assert np.array_equal(short.B, one.B[:100])
