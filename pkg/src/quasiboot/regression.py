"""Linear model ``y_i = Psi_i' theta* + e_i`` and its wild bootstrap.

The loss ``T = ||(Psi Psi')^{1/2} (theta_hat - theta*)||`` equals
``||(Psi Psi')^{-1/2} sum_i Psi_i e_i||``; its bootstrap version multiplies each
``e_i`` by an i.i.d. weight. With the whitened summands
``X_i = (Psi Psi')^{-1/2} Psi_i e_i`` both are ``sqrt(n)`` times the
statistics of :mod:`quasiboot.bootstrap`, which is how the coverage loop is
shared.
"""
from dataclasses import dataclass, field

import numpy as np

from .bootstrap import bootstrap_replicate_norms, upper_quantile_rank
from .distributions import DistributionSpec
from .tables import CoverageTable

__all__ = [
    "IllConditioned",
    "DesignMatrix",
    "RegressionModel",
    "gaussian_design",
    "fourier_design",
    "simulate_response",
    "least_squares",
    "t_statistic",
    "whitened_summands",
    "wild_bootstrap_replicates",
    "wild_bootstrap_t",
    "regression_rep",
    "regression_coverage",
]


class IllConditioned(ValueError):
    """``Psi Psi'`` is singular or too badly conditioned."""


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """Regressors ``Psi`` of shape ``(p, n)``; column ``i`` is ``Psi_i``.

    The symmetric eigendecomposition of ``Psi Psi'`` is computed once and
    serves the inverse, the square root and the inverse square root.
    """

    psi: np.ndarray
    max_condition: float = 1e8
    eigvals: np.ndarray = field(init=False, repr=False)
    eigvecs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        psi = np.array(self.psi, dtype=float)
        if psi.ndim == 1:
            psi = psi[None, :]
        if psi.ndim != 2 or not np.all(np.isfinite(psi)):
            raise ValueError("Psi must be a finite (p, n) array")
        psi.setflags(write=False)
        gram = psi @ psi.T
        w, V = np.linalg.eigh(gram)
        if not w[0] > 0 or w[-1] / w[0] > self.max_condition:
            cond = np.inf if not w[0] > 0 else w[-1] / w[0]
            raise IllConditioned(f"Psi Psi' has condition number {cond:.3g} > {self.max_condition:.3g}")
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "eigvals", w)
        object.__setattr__(self, "eigvecs", V)

    @property
    def p(self):
        return self.psi.shape[0]

    @property
    def n(self):
        return self.psi.shape[1]

    def _apply(self, power, v):
        V = self.eigvecs
        return V @ ((self.eigvals**power)[:, None] * (V.T @ v)) if v.ndim == 2 else V @ (self.eigvals**power * (V.T @ v))

    def gram_inv(self, v):
        return self._apply(-1.0, v)

    def gram_sqrt(self, v):
        return self._apply(0.5, v)

    def gram_inv_sqrt(self, v):
        return self._apply(-0.5, v)


@dataclass(frozen=True)
class RegressionModel:
    theta_star: np.ndarray
    error_spec: DistributionSpec

    def __post_init__(self):
        theta = np.atleast_1d(np.asarray(self.theta_star, dtype=float))
        object.__setattr__(self, "theta_star", theta)
        m = self.error_spec.raw_moments(4)
        if abs(m[1]) > 1e-9 * (1.0 + abs(m[2]) ** 0.5):
            raise ValueError(f"error law {self.error_spec} must have mean 0, has {m[1]!r}")


def gaussian_design(p, n, rng, max_condition=1e8):
    """I.i.d. standard normal regressors, frozen once drawn."""
    return DesignMatrix(rng.standard_normal((p, n)), max_condition)


def fourier_design(p, n, max_condition=1e8):
    """Deterministic trigonometric regressors on the grid ``t_i = (i + 1/2) / n``.

    Rows are ``1, cos(2 pi t), sin(2 pi t), cos(4 pi t), ...``.
    """
    t = (np.arange(n) + 0.5) / n
    rows = [np.ones(n)]
    k = 1
    while len(rows) < p:
        rows.append(np.sqrt(2.0) * np.cos(2 * np.pi * k * t))
        if len(rows) < p:
            rows.append(np.sqrt(2.0) * np.sin(2 * np.pi * k * t))
        k += 1
    return DesignMatrix(np.array(rows), max_condition)


def simulate_response(design, model, rng):
    """Draw errors and return ``(y, errors)``."""
    if model.theta_star.shape != (design.p,):
        raise ValueError(f"theta* must have length {design.p}")
    errors = np.asarray(model.error_spec.sample(rng, design.n), dtype=float)
    y = design.psi.T @ model.theta_star + errors
    return y, errors


def least_squares(design, y):
    """``(Psi Psi')^{-1} Psi y``."""
    y = np.asarray(y, dtype=float)
    if y.shape != (design.n,):
        raise ValueError(f"y must have length {design.n}")
    return design.gram_inv(design.psi @ y)


def t_statistic(design, theta_hat, theta_star):
    """``||(Psi Psi')^{1/2} (theta_hat - theta*)||``."""
    d = np.asarray(theta_hat, dtype=float) - np.asarray(theta_star, dtype=float)
    return float(np.linalg.norm(design.gram_sqrt(d)))


def whitened_summands(design, errors):
    """Rows ``X_i = (Psi Psi')^{-1/2} Psi_i e_i``, shape ``(n, p)``."""
    errors = np.asarray(errors, dtype=float)
    return (design.gram_inv_sqrt(design.psi) * errors[None, :]).T


def wild_bootstrap_replicates(design, errors, weights):
    """``T^b`` for every row of the ``(B, n)`` weight matrix.

    ``errors`` are the true errors in the default mode or residuals in the
    practical variant; the formula is the same.
    """
    X = whitened_summands(design, errors)
    weights = np.atleast_2d(np.asarray(weights, dtype=float))
    return bootstrap_replicate_norms(X, weights) * np.sqrt(design.n)


def wild_bootstrap_t(design, errors, scheme, rng):
    """One replicate ``||(Psi Psi')^{-1/2} sum_i Psi_i e_i eps_i||``."""
    w = scheme.draw(rng, (1, design.n))
    return float(wild_bootstrap_replicates(design, errors, w)[0])


def regression_rep(design, model, scheme, B, alphas, rng, mode="oracle"):
    """One Monte Carlo repetition: indicators ``T <= Q_T^b(alpha)`` per level.

    Draw order on ``rng``: the ``n`` errors, then the ``(B, n)`` weights.
    ``mode="oracle"`` feeds the true errors to the bootstrap;
    ``mode="residuals"`` uses ``y - Psi' theta_hat`` instead.
    """
    y, errors = simulate_response(design, model, rng)
    # theta_hat - theta* = (Psi Psi')^{-1} Psi (y - Psi' theta*), exactly 0 on noise-free data
    delta = least_squares(design, y - design.psi.T @ model.theta_star)
    T = t_statistic(design, delta, 0.0)
    if mode == "oracle":
        base = errors
    elif mode == "residuals":
        base = y - design.psi.T @ (model.theta_star + delta)
    else:
        raise ValueError(f"unknown bootstrap mode {mode!r}")
    W = scheme.draw(rng, (B, design.n))
    reps = np.sort(wild_bootstrap_replicates(design, base, W))
    q = np.array([reps[upper_quantile_rank(B, a) - 1] for a in alphas])
    return T <= q


def regression_coverage(design, model, scheme, B, alphas, R, rng, mode="oracle", seed=None):
    """Coverage frequencies of ``T <= Q_T^b(alpha)`` over ``R`` repetitions.

    Repetitions consume ``rng`` sequentially; the harness version
    (:func:`quasiboot.harness.run_regression_coverage`) gives each repetition
    its own stream instead.

    Returns
    -------
    CoverageTable
        One row per entry of ``alphas``; ``seed`` is only recorded.
    """
    hits = np.zeros(len(alphas), dtype=np.int64)
    for _ in range(R):
        hits += regression_rep(design, model, scheme, B, alphas, rng, mode)
    return CoverageTable.from_hits("regression", design.n, design.p, model.error_spec, scheme, alphas, hits, R, B, seed)
