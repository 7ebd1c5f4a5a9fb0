import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quasiboot.bootstrap import (
    as_sample,
    bootstrap_quantile,
    bootstrap_replicate_norm,
    bootstrap_replicate_norms,
    empirical_upper_quantile,
    scaled_sum,
    upper_quantile_rank,
)
from quasiboot.rng import make_stream
from quasiboot.weights import BernoulliMix, PureGaussian


def inf_definition(values, alpha):
    """Smallest candidate ``t`` among the values with ``#{v > t} / B <= alpha``."""
    v = np.asarray(values, dtype=float)
    B = v.size
    ok = [t for t in v if np.count_nonzero(v > t) / B <= alpha]
    return min(ok)


def test_scaled_sum():
    X = np.array([[1.0, 2.0], [3.0, -2.0], [0.0, 0.0], [-1.0, 4.0]])
    assert np.allclose(scaled_sum(X), [1.5, 2.0])
    assert np.allclose(scaled_sum([1.0, 1.0, 1.0, 1.0]), [2.0])


def test_replicate_norm_hand_values():
    X = np.array([[3.0], [4.0]])
    assert bootstrap_replicate_norm(X, [1.0, -1.0]) == pytest.approx(1 / np.sqrt(2))
    assert bootstrap_replicate_norm(X, [0.0, 0.0]) == 0.0
    assert bootstrap_replicate_norm(X, [1.0, 1.0]) == pytest.approx(np.linalg.norm(scaled_sum(X)))


def test_replicate_norms_match_single():
    g = make_stream(1, "bs")
    X = g.standard_normal((20, 3))
    E = g.standard_normal((7, 20))
    many = bootstrap_replicate_norms(X, E)
    assert np.allclose(many, [bootstrap_replicate_norm(X, e) for e in E], rtol=1e-14)


def test_sample_validation():
    with pytest.raises(ValueError):
        as_sample(np.zeros((2, 2, 2)))
    with pytest.raises(ValueError):
        as_sample([[np.nan]])
    with pytest.raises(ValueError):
        bootstrap_replicate_norm(np.ones((3, 1)), [1.0, 1.0])


def test_quantile_examples():
    assert empirical_upper_quantile([1, 2, 3, 4], 0.25).value == 3
    assert empirical_upper_quantile([1, 2, 3, 4], 0.5).value == 2
    assert empirical_upper_quantile([5, 5, 5], 0.1).value == 5
    q = empirical_upper_quantile(np.arange(1000.0), 0.05)
    assert q.rank == 950 and q.value == 949.0


def test_rank_rounding():
    # 0.7 * 10 = 6.999999999999999 in floating point
    assert upper_quantile_rank(10, 0.7) == 3
    assert upper_quantile_rank(1000, 0.3) == 700
    with pytest.raises(ValueError):
        upper_quantile_rank(10, 1.0)
    with pytest.raises(ValueError):
        empirical_upper_quantile([], 0.5)


@settings(max_examples=300, deadline=None)
@given(
    st.lists(st.integers(-5, 5), min_size=1, max_size=40),
    st.floats(0.001, 0.999),
)
def test_quantile_matches_inf_definition_with_ties(values, alpha):
    assert empirical_upper_quantile(values, alpha).value == inf_definition(values, alpha)


def test_bootstrap_quantile_levels_share_replicates():
    g = make_stream(2, "bq")
    X = g.standard_normal((30, 4))
    alphas = [0.025, 0.05, 0.1, 0.5]
    qs = bootstrap_quantile(X, BernoulliMix(0.276), 500, alphas, make_stream(2, "w"))
    vals = [q.value for q in qs]
    assert vals == sorted(vals, reverse=True)
    E = BernoulliMix(0.276).draw(make_stream(2, "w"), (500, 30))
    reps = bootstrap_replicate_norms(X, E)
    for q in qs:
        assert q.value == empirical_upper_quantile(reps, q.alpha).value


def test_gaussian_weights_reproduce_norm_law():
    # given X, S^b is N(0, X'X/n); with orthonormal-ish columns its norm is close to chi
    g = make_stream(3, "chi")
    n, p = 400, 3
    X = g.standard_normal((n, p))
    X = X / np.sqrt((X**2).mean(axis=0))
    q = bootstrap_quantile(X, PureGaussian(), 20000, [0.5], make_stream(3, "w"))[0]
    # median of chi with 3 degrees of freedom
    assert q.value == pytest.approx(1.5382, abs=0.05)
