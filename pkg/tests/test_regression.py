import numpy as np
import pytest

from quasiboot.bootstrap import bootstrap_replicate_norms, scaled_sum, upper_quantiles_sorted
from quasiboot.distributions import ChiSquare1, FiniteAtomic, Gaussian
from quasiboot.regression import (
    DesignMatrix,
    IllConditioned,
    RegressionModel,
    fourier_design,
    gaussian_design,
    least_squares,
    regression_coverage,
    regression_rep,
    simulate_response,
    t_statistic,
    whitened_summands,
    wild_bootstrap_replicates,
    wild_bootstrap_t,
)
from quasiboot.rng import make_stream
from quasiboot.weights import BernoulliMix, Custom, PureGaussian

TWO = DesignMatrix(np.array([[1.0, 1.0]]))


def rng(*key):
    return make_stream(4242, "regression", *key)


def test_hand_example_two_points():
    model = RegressionModel([2.0], Gaussian(0, 0))
    y, err = simulate_response(TWO, model, rng())
    assert np.array_equal(y, [2.0, 2.0]) and np.array_equal(err, [0, 0])
    y = np.array([2.5, 1.5])
    theta = least_squares(TWO, y)
    assert theta == pytest.approx([2.0])
    # T = |e1 + e2| / sqrt(2)
    assert t_statistic(TWO, [2.3], [2.0]) == pytest.approx(abs(0.6) / np.sqrt(2))
    assert t_statistic(TWO, [2.0], [2.0]) == 0.0


def test_wild_bootstrap_hand_example():
    reps = wild_bootstrap_replicates(TWO, np.array([3.0, 4.0]), np.array([[1.0, -1.0], [0.0, 0.0], [1.0, 1.0]]))
    assert reps == pytest.approx([1 / np.sqrt(2), 0.0, 7 / np.sqrt(2)])
    zero = Custom(0.0, FiniteAtomic((0.0,), (1.0,)))
    assert wild_bootstrap_t(TWO, np.array([3.0, 4.0]), zero, rng()) == 0.0


def test_theta_zero_response_is_errors():
    d = gaussian_design(3, 20, rng("d"))
    y, err = simulate_response(d, RegressionModel(np.zeros(3), ChiSquare1()), rng())
    assert np.array_equal(y, err)


def test_least_squares_properties():
    d = gaussian_design(4, 60, rng("d"))
    theta = np.array([1.0, -2.0, 0.5, 3.0])
    assert least_squares(d, d.psi.T @ theta) == pytest.approx(theta, abs=1e-10)
    y = rng("y").standard_normal(60)
    th = least_squares(d, y)
    assert np.linalg.norm(d.psi @ (y - d.psi.T @ th)) <= 1e-8 * np.linalg.norm(y)
    # orthonormal rows: theta_hat = Psi y
    q, _ = np.linalg.qr(rng("q").standard_normal((60, 4)))
    o = DesignMatrix(q.T)
    assert least_squares(o, y) == pytest.approx(q.T @ y)
    assert t_statistic(o, th, np.zeros(4)) == pytest.approx(np.linalg.norm(th))


def test_t_identity_random():
    g = rng("id")
    for _ in range(20):
        p, n = g.integers(1, 6), g.integers(10, 40)
        d = DesignMatrix(g.standard_normal((p, n)))
        theta = g.standard_normal(p)
        err = g.standard_normal(n)
        th = least_squares(d, d.psi.T @ theta + err)
        T = t_statistic(d, th, theta)
        direct = np.linalg.norm(d.gram_inv_sqrt(d.psi @ err))
        assert T == pytest.approx(direct, rel=1e-8)
        # all-ones weights give T back
        assert wild_bootstrap_replicates(d, err, np.ones((1, n)))[0] == pytest.approx(T, rel=1e-8)


def test_affine_equivariance():
    g = rng("aff")
    d = gaussian_design(3, 30, g)
    err = g.standard_normal(30)
    shift = np.array([5.0, -1.0, 2.0])
    T0 = t_statistic(d, least_squares(d, err), np.zeros(3))
    T1 = t_statistic(d, least_squares(d, d.psi.T @ shift + err), shift)
    assert T1 == pytest.approx(T0, abs=1e-10)


def test_ill_conditioned():
    with pytest.raises(IllConditioned):
        DesignMatrix(np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]]))
    with pytest.raises(IllConditioned):
        DesignMatrix(np.array([[1.0, 0.0], [0.0, 1e-5]]))


def test_error_law_must_be_centred():
    with pytest.raises(ValueError):
        RegressionModel([0.0], ChiSquare1(centered=False))


def test_fourier_design_orthogonal():
    d = fourier_design(5, 64)
    assert d.psi @ d.psi.T / 64 == pytest.approx(np.eye(5), abs=1e-12)


def test_zero_noise_coverage_one():
    d = gaussian_design(2, 20, rng("d"))
    tab = regression_coverage(d, RegressionModel(np.ones(2), Gaussian(0, 0)), BernoulliMix(0.276), 50, [0.05, 0.5], 20, rng())
    assert np.array_equal(tab.frequencies(), [1.0, 1.0])


def test_reduction_to_norm_bootstrap():
    # Psi = c I: X_i = e_i e_i, so T = sqrt(n) ||S_n|| and T^b = sqrt(n) ||S^b_n||
    n, c, B = 12, 3.0, 200
    d = DesignMatrix(c * np.eye(n))
    model = RegressionModel(np.zeros(n), ChiSquare1())
    alphas = [0.05, 0.2, 0.5]
    scheme = BernoulliMix(0.276)
    for r in range(30):
        got = regression_rep(d, model, scheme, B, alphas, rng("red", r))
        g = rng("red", r)
        err = ChiSquare1().sample(g, n)
        X = np.diag(err)
        assert whitened_summands(d, err) == pytest.approx(X)
        stat = np.linalg.norm(scaled_sum(X))
        W = scheme.draw(g, (B, n))
        q = upper_quantiles_sorted(np.sort(bootstrap_replicate_norms(X, W)), alphas)
        assert np.array_equal(got, stat <= q)


def test_gaussian_errors_median_coverage():
    d = gaussian_design(3, 50, rng("d"))
    tab = regression_coverage(d, RegressionModel(np.zeros(3), Gaussian(0, 1)), PureGaussian(), 1000, [0.5], 2000, rng("g"))
    assert abs(tab.frequencies()[0] - 0.5) <= 0.05


def test_chisq_errors_coverage_near_nominal():
    d = gaussian_design(3, 100, rng("d"))
    tab = regression_coverage(d, RegressionModel(np.zeros(3), ChiSquare1()), BernoulliMix(0.276), 1000, [0.1, 0.2], 2000, rng("c"))
    assert np.all(np.abs(tab.frequencies() - [0.9, 0.8]) <= 0.04)
    assert list(tab.levels()) == pytest.approx([0.9, 0.8])


def test_residual_mode_runs():
    d = fourier_design(3, 40)
    hits = regression_rep(d, RegressionModel(np.zeros(3), ChiSquare1()), BernoulliMix(0.276), 100, [0.1], rng(), mode="residuals")
    assert hits.dtype == bool and hits.shape == (1,)
    with pytest.raises(ValueError):
        regression_rep(d, RegressionModel(np.zeros(3), ChiSquare1()), BernoulliMix(0.276), 100, [0.1], rng(), mode="bogus")
