"""Scaled sums, weighted-bootstrap replicates and the empirical upper quantile.

For a sample ``X`` of shape ``(n, p)`` the statistic is ``||S_n||`` with
``S_n = n**-0.5 * sum_i X_i``; a bootstrap replicate replaces ``X_i`` by
``X_i * eps_i`` for i.i.d. multipliers ``eps_i``. Quantiles are the exact
empirical version of ``inf{t : P(||S^b_n|| > t) <= alpha}`` with no
interpolation.
"""
from dataclasses import dataclass
from math import floor

import numpy as np

__all__ = [
    "QuantileEstimate",
    "as_sample",
    "scaled_sum",
    "bootstrap_replicate_norm",
    "bootstrap_replicate_norms",
    "upper_quantile_rank",
    "empirical_upper_quantile",
    "upper_quantiles_sorted",
    "bootstrap_quantile",
]


@dataclass(frozen=True)
class QuantileEstimate:
    """Empirical upper quantile: the ``rank``-th smallest of ``B`` replicates."""

    alpha: float
    value: float
    B: int
    rank: int


def as_sample(X):
    """Validate ``X`` as an ``(n, p)`` array of finite reals.

    One-dimensional input is read as ``n`` scalar observations (``p = 1``).
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"sample must have shape (n, p) with n, p >= 1, got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("sample entries must be finite")
    return X


def scaled_sum(X):
    """``n**-0.5 * sum_i X_i``."""
    X = as_sample(X)
    return X.sum(axis=0) / np.sqrt(X.shape[0])


def bootstrap_replicate_norm(X, eps):
    """``|| n**-0.5 * sum_i X_i eps_i ||`` for one weight vector."""
    X = as_sample(X)
    eps = np.asarray(eps, dtype=float)
    if eps.shape != (X.shape[0],):
        raise ValueError(f"need {X.shape[0]} weights, got shape {eps.shape}")
    return float(np.linalg.norm(eps @ X) / np.sqrt(X.shape[0]))


def bootstrap_replicate_norms(X, E):
    """Replicate norms for every row of the ``(B, n)`` weight matrix ``E``."""
    X = as_sample(X)
    E = np.asarray(E, dtype=float)
    if E.ndim != 2 or E.shape[1] != X.shape[0]:
        raise ValueError(f"weight matrix must have shape (B, {X.shape[0]}), got {E.shape}")
    S = E @ X
    return np.sqrt(np.einsum("ij,ij->i", S, S)) / np.sqrt(X.shape[0])


def upper_quantile_rank(B, alpha):
    """1-based rank ``m = B - floor(alpha * B)`` of the upper quantile.

    ``floor(alpha * B)`` is taken as the largest ``k`` with ``k / B <= alpha``
    in floating point, so the rank agrees with a direct count of the
    exceedance frequency even when ``alpha * B`` rounds badly.
    """
    if B < 1:
        raise ValueError("need at least one replicate")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    k = floor(alpha * B)
    while (k + 1) / B <= alpha:
        k += 1
    while k > 0 and k / B > alpha:
        k -= 1
    return B - k


def upper_quantiles_sorted(sorted_values, alphas):
    """Upper quantiles of an ascending array for several levels at once."""
    B = len(sorted_values)
    return np.array([sorted_values[upper_quantile_rank(B, a) - 1] for a in alphas])


def empirical_upper_quantile(values, alpha):
    """Smallest order statistic ``v`` with ``#{v_j > v} / B <= alpha``.

    Parameters
    ----------
    values : array_like
        The ``B`` replicate values.
    alpha : float
        Level in ``(0, 1)``.

    Returns
    -------
    QuantileEstimate
    """
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size == 0:
        raise ValueError("cannot take a quantile of an empty replicate set")
    m = upper_quantile_rank(v.size, alpha)
    return QuantileEstimate(alpha=float(alpha), value=float(v[m - 1]), B=int(v.size), rank=m)


def bootstrap_quantile(X, scheme, B, alphas, rng):
    """Bootstrap upper quantiles of ``||S^b_n||`` given the sample.

    Draws a ``(B, n)`` weight matrix once and evaluates every level on the same
    sorted replicate set.

    Returns
    -------
    list of QuantileEstimate
        In the order of ``alphas``.
    """
    X = as_sample(X)
    E = scheme.draw(rng, (B, X.shape[0]))
    reps = np.sort(bootstrap_replicate_norms(X, E))
    out = []
    for a in alphas:
        m = upper_quantile_rank(B, a)
        out.append(QuantileEstimate(alpha=float(a), value=float(reps[m - 1]), B=int(B), rank=m))
    return out
