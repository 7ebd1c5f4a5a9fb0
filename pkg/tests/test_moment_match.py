from math import e, sqrt

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasiboot.distributions import (
    FiniteAtomic,
    GaussianConvolution,
    Lognormal,
    MomentVector,
    ShiftedScaledPareto,
)
from quasiboot.moment_match import (
    AtomicMeasure,
    ConvolutionModel,
    EnumerationBudgetExceeded,
    SkewnessInfeasible,
    TargetNotSolvable,
    atomic_from_moments,
    deconvolve_moments,
    exact_poly_expectation,
    fit_shifted_pareto,
    hankel_solvable,
    linear_form_monomials,
    max_gaussian_variance,
    pareto_skewness,
    pareto_split,
    product_law,
    reconvolve_moments,
    verify_match,
)
from quasiboot.rng import make_stream

STD_LOGNORMAL = Lognormal(1.0, "std")


def test_deconvolve_gaussian_to_point_mass():
    u = deconvolve_moments(MomentVector([1, 0, 1, 0, 3]), 1.0)
    assert np.allclose(u.values, [1, 0, 0, 0, 0], atol=1e-15)


def test_deconvolve_zero_variance_is_identity():
    m = STD_LOGNORMAL.raw_moments(4)
    assert deconvolve_moments(m, 0.0) == m


def test_deconvolve_explicit_recursion():
    m = np.array([1.0, 0.2, 1.5, 0.9, 5.0])
    v = 0.3
    u = deconvolve_moments(m, v).values
    u1 = m[1]
    u2 = m[2] - v
    u3 = m[3] - 3 * v * u1
    u4 = m[4] - 6 * v * u2 - 3 * v * v
    assert np.allclose(u, [1, u1, u2, u3, u4], rtol=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6), st.floats(-2, 2))
def test_deconvolve_reconvolve_identity(tail, v):
    m = np.array([1.0] + tail)
    back = reconvolve_moments(deconvolve_moments(m, v), v).values
    assert np.allclose(back, m, rtol=1e-12, atol=1e-12 * (1 + np.abs(m).max()) * 10)


def test_deconvolve_lognormal_split_vs_rounded_pareto():
    split = pareto_split(STD_LOGNORMAL)
    u = deconvolve_moments(STD_LOGNORMAL.raw_moments(3), split.var_z).values
    for scale in (4.333, 4.334):
        rounded = ShiftedScaledPareto(0.5, 4.1, 0.661, scale).raw_moments(3).values
        assert np.max(np.abs(u - rounded)) <= 5e-3


@pytest.mark.parametrize(
    "u,want",
    [
        ([1, 0, 1, 0, 1], True),
        ([1, 0, 0, 0, 1], False),
        ([1, 0, 1, 0, 3], True),
        ([1, 0, 1, 0, 0.5], False),
        ([1, 0, -0.1], False),
        ([1, 2, 4], True),
        ([1, 0, 1, 0, 1, 0, 1], True),
        ([1, 0, 1, 0, 1, 0, 2], False),
    ],
)
def test_hankel_solvable(u, want):
    assert hankel_solvable(u) is want


def test_hankel_on_random_atomic_sequences():
    g = make_stream(5, "hankel")
    for _ in range(50):
        nodes = g.normal(size=4)
        w = g.dirichlet(np.ones(4))
        u = np.array([np.dot(w, nodes**k) for k in range(7)])
        assert hankel_solvable(u)
        # lowering u_6 past the Schur complement of the top-left block breaks PSD
        H = u[np.add.outer(np.arange(4), np.arange(4))]
        schur = H[3, 3] - H[3, :3] @ np.linalg.solve(H[:3, :3], H[:3, 3])
        bad = u.copy()
        bad[6] -= schur + 1e-3 * (1 + u[6])
        assert not hankel_solvable(bad)


def test_max_gaussian_variance_gaussian():
    assert max_gaussian_variance([1, 0, 1, 0, 3]) == pytest.approx(1.0, abs=1e-9)


def _grid_scan(m, step=1e-4):
    hi = m[2] - m[1] ** 2
    best = 0.0
    for v in np.arange(0.0, hi + step / 2, step):
        if hankel_solvable(deconvolve_moments(m, v)):
            best = v
    return best


def test_max_gaussian_variance_rademacher():
    m = np.array([1.0, 0, 1, 0, 1])
    v = max_gaussian_variance(m)
    assert v == pytest.approx(_grid_scan(m), abs=2e-4)
    assert v == pytest.approx(0.0, abs=1e-9)


def test_max_gaussian_variance_lognormal_and_certificate():
    m = STD_LOGNORMAL.raw_moments(4)
    tol = 1e-10
    v = max_gaussian_variance(m, tol)
    assert v >= pareto_split(STD_LOGNORMAL).var_z
    assert v > 0.046
    assert hankel_solvable(deconvolve_moments(m, v - tol))
    assert not hankel_solvable(deconvolve_moments(m, v + 10 * tol))
    coarse = _grid_scan(m.values, step=1e-3)
    assert abs(v - coarse) <= 1e-3


def test_max_gaussian_variance_rejects_invalid():
    with pytest.raises(TargetNotSolvable):
        max_gaussian_variance([1, 0, 0, 0, 1])


def test_atomic_gauss_three_point():
    mu = atomic_from_moments([1, 0, 1, 0, 3])
    assert np.allclose(mu.nodes, [-sqrt(3), 0, sqrt(3)], atol=1e-12)
    assert np.allclose(mu.weights, [1 / 6, 2 / 3, 1 / 6], atol=1e-12)
    assert np.allclose(mu.moments(4), [1, 0, 1, 0, 3], atol=1e-12)


def test_atomic_rademacher_and_point_mass():
    mu = atomic_from_moments([1, 0, 1])
    assert np.allclose(mu.nodes, [-1, 1]) and np.allclose(mu.weights, [0.5, 0.5])
    mu = atomic_from_moments([1, 2.5, 6.25])
    assert np.allclose(mu.nodes, [2.5]) and np.allclose(mu.weights, [1.0])
    mu = atomic_from_moments([1, 0, 1, 0, 1])
    assert np.allclose(mu.nodes, [-1, 1]) and np.allclose(mu.weights, [0.5, 0.5])


def test_atomic_odd_order_gauss_rule():
    mu = atomic_from_moments([1, 0, 1, 0])
    assert len(mu) == 2 and np.allclose(mu.moments(3), [1, 0, 1, 0])


def test_atomic_rejects():
    with pytest.raises(TargetNotSolvable):
        atomic_from_moments([1, 0, 0, 0, 1])
    with pytest.raises(TargetNotSolvable):
        atomic_from_moments([1, 0, -1])


def _random_atomic(g, d):
    nodes = np.sort(g.normal(size=d) * g.uniform(0.5, 2.0))
    w = g.dirichlet(np.ones(d)) * 0.9 + 0.1 / d
    return nodes, w


@pytest.mark.parametrize("K", [4, 6])
def test_atomic_round_trip(K):
    g = make_stream(9, "roundtrip", K)
    for _ in range(100):
        d = g.integers(1, K // 2 + 2)
        nodes, w = _random_atomic(g, d)
        u = np.array([np.dot(w, nodes**k) for k in range(K + 1)])
        mu = atomic_from_moments(u)
        assert np.all(np.diff(mu.nodes) > 0) and np.all(mu.weights > 0)
        assert np.allclose(mu.moments(K), u, rtol=1e-9, atol=1e-9)


def test_atomic_spec_conversion():
    mu = atomic_from_moments([1, 0, 1, 0, 3])
    spec = mu.to_spec()
    assert isinstance(spec, FiniteAtomic)
    assert np.allclose(spec.raw_moments(4).values, [1, 0, 1, 0, 3])


def test_pareto_skewness_decreasing_to_two():
    a = np.linspace(3.5, 200, 400)
    s = [pareto_skewness(x) for x in a]
    assert np.all(np.diff(s) < 0) and s[-1] > 2


def test_fit_shifted_pareto_lognormal_split():
    split = pareto_split(STD_LOGNORMAL)
    u = deconvolve_moments(STD_LOGNORMAL.raw_moments(3), split.var_z).values
    assert u[2] == pytest.approx(0.9541, abs=1e-4)
    assert u[3] == pytest.approx((e + 2) * sqrt(e - 1))
    fit = fit_shifted_pareto(u[2], u[3])
    assert 4.0 <= fit.a <= 4.2
    assert abs(fit.scale - 4.333) <= 1e-2
    m = fit.raw_moments(3).values
    assert np.allclose(m[1:], [0, u[2], u[3]], atol=1e-9)


def test_fit_shifted_pareto_round_trip_shape():
    P = ShiftedScaledPareto(0.5, 5.0)
    c = P.raw_moments(3).values
    mean = c[1]
    u2 = c[2] - mean**2
    u3 = c[3] - 3 * mean * c[2] + 2 * mean**3
    assert fit_shifted_pareto(u2, u3).a == pytest.approx(5.0, abs=1e-9)


def test_fit_shifted_pareto_infeasible():
    with pytest.raises(SkewnessInfeasible):
        fit_shifted_pareto(1.0, 2.0)
    with pytest.raises(SkewnessInfeasible):
        fit_shifted_pareto(1.0, 100.0)


def test_verify_match():
    assert verify_match(STD_LOGNORMAL, STD_LOGNORMAL, 4) == 0.0
    split = pareto_split(STD_LOGNORMAL)
    assert verify_match(STD_LOGNORMAL, split, 3) <= 1e-9
    model = ConvolutionModel(split.var_z, deconvolve_moments(STD_LOGNORMAL.raw_moments(3), split.var_z))
    assert verify_match(STD_LOGNORMAL, model, 3) <= 1e-12
    var_p = ShiftedScaledPareto(0.5, 4.1).variance()
    for scale in (4.333, 4.334):
        rounded = GaussianConvolution(1 - scale**2 * var_p, ShiftedScaledPareto(0.5, 4.1, 0.661, scale))
        assert verify_match(STD_LOGNORMAL, rounded, 3) <= 5e-3


def test_pareto_split_constants():
    split = pareto_split(STD_LOGNORMAL)
    assert split.atom.a == 4.1 and split.atom.xm == 0.5
    assert split.atom.shift == pytest.approx(0.661, abs=5e-4)
    assert split.atom.scale == pytest.approx(4.333, abs=2e-3)
    assert split.var_z == pytest.approx(0.046, abs=1e-3)


def test_poly_expectation_constant_and_budget():
    law = FiniteAtomic((-1.0, 1.0), (0.5, 0.5))
    assert exact_poly_expectation([law] * 3, [(1.0, (0,))]) == 1.0
    with pytest.raises(EnumerationBudgetExceeded):
        exact_poly_expectation([law] * 21, [(1.0, (0,))])


def test_poly_expectation_two_point_pair():
    # two 2-point laws with moments (0, 1, 1): only the fourth moment differs
    a = FiniteAtomic(((1 - sqrt(5)) / 2, (1 + sqrt(5)) / 2), ((5 + sqrt(5)) / 10, (5 - sqrt(5)) / 10))
    mu = atomic_from_moments([1, 0, 1, 1])
    b = mu.to_spec()
    assert np.allclose(a.raw_moments(3).values, b.raw_moments(3).values, atol=1e-14)
    c = AtomicMeasure(np.array([-1.0, 0.0, 2.0]), np.array([1 / 3, 1 / 2, 1 / 6]))
    assert np.allclose(c.moments(3), [1, 0, 1, 1])
    x3 = [(1.0, (3,))]
    x4 = [(1.0, (4,))]
    ea = exact_poly_expectation([a] * 3, x3)
    ec = exact_poly_expectation([c] * 3, x3)
    assert ea == pytest.approx(ec, abs=1e-12)
    assert abs(exact_poly_expectation([a] * 3, x4) - exact_poly_expectation([c] * 3, x4)) > 1e-3


def test_poly_expectation_closed_form():
    # E S_n^4 = 3 (n-1)/n m2^2 + m4 / n for i.i.d. mean-zero summands
    law = FiniteAtomic((-1.0, 0.0, 2.0), (1 / 3, 1 / 2, 1 / 6))
    m = law.raw_moments(4).values
    n = 4
    got = exact_poly_expectation([law] * n, {(4,): 1.0})
    assert got == pytest.approx(3 * (n - 1) / n * m[2] ** 2 + m[4] / n, rel=1e-13)


def test_product_law_and_linear_form():
    x = ([[1.0, 2.0], [-1.0, 0.5]], [0.25, 0.75])
    w = FiniteAtomic((-1.0, 3.0), (0.75, 0.25))
    nodes, probs = product_law(x, w)
    assert nodes.shape == (4, 2) and probs.sum() == pytest.approx(1)
    # E(X eps) = E X * E eps = 0
    assert np.allclose(probs @ nodes, np.zeros(2))
    mono = dict((e, c) for c, e in linear_form_monomials([2.0, -1.0], 2))
    assert mono == {(2, 0): 4.0, (1, 1): -4.0, (0, 2): 1.0}
