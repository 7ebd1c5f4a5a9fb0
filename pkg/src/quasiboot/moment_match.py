"""Moment matching for quasi-Gaussian approximations.

A zero-mean law ``X`` is approximated by ``Y = Z + U`` with ``Z`` Gaussian
and ``U`` independent, such that ``E X**k = E Y**k`` for ``k < K``. This module
splits a moment sequence into a Gaussian part and a residual, decides whether
the residual is a valid truncated Hamburger moment sequence, realizes it by a
finite atomic measure (Golub-Welsch), and fits the shifted-scaled Pareto
residual used for heavy-tailed targets. It also evaluates polynomial
expectations of normalized sums exactly by enumeration.
"""
from dataclasses import dataclass
from itertools import product as iproduct
from math import comb, factorial, sqrt

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from .distributions import (
    DistributionSpec,
    FiniteAtomic,
    GaussianConvolution,
    MomentVector,
    ShiftedScaledPareto,
    convolve_gaussian_moments,
    double_factorial,
)

__all__ = [
    "TargetNotSolvable",
    "SkewnessInfeasible",
    "EnumerationBudgetExceeded",
    "AtomicMeasure",
    "ConvolutionModel",
    "deconvolve_moments",
    "reconvolve_moments",
    "hankel_matrix",
    "hankel_solvable",
    "max_gaussian_variance",
    "recurrence_coefficients",
    "atomic_from_moments",
    "pareto_skewness",
    "fit_shifted_pareto",
    "pareto_split",
    "verify_match",
    "exact_poly_expectation",
    "product_law",
    "linear_form_monomials",
]


class TargetNotSolvable(ValueError):
    """The moment sequence has no representing measure."""


class SkewnessInfeasible(ValueError):
    """No Pareto shape in the allowed range has the requested skewness."""


class EnumerationBudgetExceeded(ValueError):
    pass


@dataclass(frozen=True)
class AtomicMeasure:
    """Finite measure with increasing ``nodes`` and positive ``weights``."""

    nodes: np.ndarray
    weights: np.ndarray

    def moments(self, K):
        return np.array([np.dot(self.weights, self.nodes**k) for k in range(K + 1)])

    def to_spec(self):
        """The same law as a :class:`FiniteAtomic` (weights renormalized)."""
        w = self.weights / self.weights.sum()
        return FiniteAtomic(tuple(self.nodes), tuple(w))

    def __len__(self):
        return self.nodes.size


@dataclass(frozen=True)
class ConvolutionModel:
    """Gaussian variance plus the raw moments of the independent residual."""

    var_z: float
    residual_moments: MomentVector

    def moments(self):
        return MomentVector(convolve_gaussian_moments(self.var_z, self.residual_moments.values))


def _as_moments(m):
    return m.values if isinstance(m, MomentVector) else np.asarray(m, dtype=float)


def deconvolve_moments(m, var_z):
    """Residual moments ``u`` with ``m = moments(N(0, var_z) + U)``.

    The system is triangular and solved forward::

        u_k = m_k - sum_{l >= 1} C(k, 2l) (2l-1)!! var_z**l u_{k-2l}

    Negative ``var_z`` is accepted and amounts to adding Gaussian noise.
    """
    m = _as_moments(m)
    u = np.empty_like(m)
    for k in range(m.size):
        acc = m[k]
        for l in range(1, k // 2 + 1):
            acc -= comb(k, 2 * l) * double_factorial(2 * l - 1) * var_z**l * u[k - 2 * l]
        u[k] = acc
    return MomentVector(u, allow_short=True)


def reconvolve_moments(u, var_z):
    return MomentVector(convolve_gaussian_moments(var_z, _as_moments(u)), allow_short=True)


def hankel_matrix(u):
    """``[u_{i+j}]`` built from ``u_0..u_{2 floor(K/2)}``."""
    u = _as_moments(u)
    h = (u.size - 1) // 2
    idx = np.add.outer(np.arange(h + 1), np.arange(h + 1))
    return u[idx]


def recurrence_coefficients(u):
    """Three-term recurrence coefficients of the monic orthogonal polynomials.

    Uses the (unmodified) Chebyshev algorithm on raw moments ``u_0..u_M``.
    Returns ``alpha_0..`` for ``2k+1 <= M`` and ``beta_0..`` for ``2k <= M``.
    Stops early if some ``beta_k`` vanishes, since the recursion is then
    undefined beyond it.
    """
    mu = _as_moments(u)
    M = mu.size - 1
    alpha, beta = [], [mu[0]]
    sig_prev = np.zeros(M + 1)
    sig = mu.copy()
    if M >= 1:
        alpha.append(mu[1] / mu[0])
    k = 1
    while 2 * k <= M:
        new = np.zeros(M + 1)
        for l in range(k, M - k + 1):
            new[l] = sig[l + 1] - alpha[k - 1] * sig[l] - beta[k - 1] * sig_prev[l]
        beta.append(new[k] / sig[k - 1])
        if not new[k] > 0 or 2 * k + 1 > M:
            break
        alpha.append(new[k + 1] / new[k] - sig[k] / sig[k - 1])
        sig_prev, sig = sig, new
        k += 1
    return np.array(alpha), np.array(beta)


def _gauss_rule(alpha, beta, mass):
    """Nodes/weights from the Jacobi matrix with diagonal ``alpha`` and off-diagonal ``sqrt(beta)``."""
    if alpha.size == 1:
        return np.array([alpha[0]]), np.array([mass])
    nodes, vecs = eigh_tridiagonal(alpha, np.sqrt(beta))
    weights = mass * vecs[0] ** 2
    return nodes, weights


def _reproduces(nodes, weights, u, rtol):
    got = np.array([np.dot(weights, nodes**k) for k in range(u.size)])
    return bool(np.all(np.abs(got - u) <= rtol * (1.0 + np.abs(u))))


def atomic_from_moments(u, rank_tol=1e-10, match_tol=1e-8):
    """Finite atomic measure with raw moments ``u_0..u_K``.

    For odd ``K = 2d - 1`` this is the ``d``-point Gauss rule. For even
    ``K = 2d`` with a positive definite Hankel matrix, a ``(d + 1)``-point rule
    reproduces all of ``u_0..u_{2d}``; its last recurrence coefficient is free
    and is set to the mean ``u_1``. When the Hankel matrix is singular the
    sequence can only come from fewer atoms; the smaller rule is built from
    the leading moments and checked against the rest.

    Parameters
    ----------
    u : MomentVector or array_like
    rank_tol : float
        Relative size below which a recurrence coefficient ``beta_k`` counts as 0.
    match_tol : float
        Relative tolerance for the consistency check after a rank reduction.

    Returns
    -------
    AtomicMeasure

    Raises
    ------
    TargetNotSolvable
        If no positive measure has these moments.
    """
    u = _as_moments(u)
    if u.size < 2:
        raise ValueError("need at least u_0 and u_1")
    if not u[0] > 0:
        raise TargetNotSolvable("u_0 must be positive")
    K = u.size - 1
    alpha, beta = recurrence_coefficients(u)
    scale = abs(u[2] / u[0]) if K >= 2 else 1.0
    thresh = rank_tol * (1.0 + scale)
    n_nodes = (K + 1) // 2 if K % 2 else K // 2 + 1
    reduced = False
    for k in range(1, beta.size):
        if beta[k] < -thresh:
            raise TargetNotSolvable(f"moment sequence is not positive (beta_{k} = {beta[k]:.3g})")
        if beta[k] <= thresh:
            n_nodes = min(n_nodes, k)
            reduced = True
            break
    a = list(alpha[:n_nodes])
    if len(a) < n_nodes:
        # even order with full rank: free last coefficient
        a.append(u[1] / u[0])
    a = np.array(a)
    b = beta[1:n_nodes]
    nodes, weights = _gauss_rule(a, b, u[0])
    order = np.argsort(nodes)
    nodes, weights = nodes[order], weights[order]
    if reduced and not _reproduces(nodes, weights, u, match_tol):
        raise TargetNotSolvable(
            f"Hankel matrix has rank {n_nodes} but the higher moments are not those of the {n_nodes}-atom measure"
        )
    return AtomicMeasure(nodes, weights)


def hankel_solvable(u, psd_tol=1e-10):
    """Whether ``u_0..u_K`` is a truncated Hamburger moment sequence.

    Requires the Hankel matrix to be positive semidefinite (minimum eigenvalue
    at least ``-psd_tol * (1 + trace)``) and, when it is singular, the higher
    moments to be those of the measure on the supported atoms.
    """
    u = _as_moments(u)
    if u.size < 3:
        raise ValueError("need moments up to order 2 at least")
    H = hankel_matrix(u)
    eig = np.linalg.eigvalsh(H)
    if eig[0] < -psd_tol * (1.0 + np.trace(H)):
        return False
    try:
        atomic_from_moments(u)
    except TargetNotSolvable:
        return False
    return True


def max_gaussian_variance(m, tol=1e-10):
    """Largest ``var_z`` whose residual ``deconvolve_moments(m, var_z)`` is solvable.

    Bisection on ``[0, m_2 - m_1**2]``; solvability is monotone because adding
    Gaussian noise to a valid residual gives another valid residual.

    Raises
    ------
    TargetNotSolvable
        If ``m`` itself fails :func:`hankel_solvable`.
    """
    mv = _as_moments(m)
    if not hankel_solvable(mv):
        raise TargetNotSolvable("target moments are not a valid moment sequence")
    hi = float(mv[2] - mv[1] ** 2)
    if hankel_solvable(deconvolve_moments(mv, hi)):
        return hi
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if hankel_solvable(deconvolve_moments(mv, mid)):
            lo = mid
        else:
            hi = mid
    return lo


def pareto_skewness(a):
    """Skewness of Pareto(xm, a), ``a > 3``; decreases from +inf to 2."""
    return 2.0 * (1.0 + a) / (a - 3.0) * sqrt((a - 2.0) / a)


def _pareto_var(xm, a):
    return xm**2 * a / ((a - 1.0) ** 2 * (a - 2.0))


def _pareto_mean(xm, a):
    return a * xm / (a - 1.0)


def fit_shifted_pareto(u2, u3, a_min=4.0, xm=0.5):
    """Zero-mean shifted-scaled Pareto with variance ``u2`` and third moment ``u3``.

    The location-scale family makes ``xm`` redundant, so it is fixed. The shape
    follows from the skewness ``u3 / u2**1.5``; scale and shift then match the
    variance and centre the law.

    Raises
    ------
    SkewnessInfeasible
        If the skewness is at most 2 (the ``a -> inf`` limit) or would need a
        shape at or below ``a_min``.
    """
    if not u2 > 0:
        raise ValueError("u2 must be positive")
    if a_min < 4:
        raise ValueError("a_min must be at least 4 so the fourth moment is finite")
    target = u3 / u2**1.5
    if not target > 2.0:
        raise SkewnessInfeasible(f"Pareto skewness exceeds 2; target is {target!r}")
    if not target < pareto_skewness(a_min):
        raise SkewnessInfeasible(
            f"target skewness {target!r} needs shape <= a_min={a_min} "
            f"(skewness there is {pareto_skewness(a_min)!r})"
        )
    hi = 2.0 * a_min
    while pareto_skewness(hi) >= target:
        hi *= 2.0
        if hi > 1e300:
            raise SkewnessInfeasible("skewness too close to 2")
    a = brentq(lambda s: pareto_skewness(s) - target, a_min, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    scale = sqrt(u2 / _pareto_var(xm, a))
    return ShiftedScaledPareto(xm, a, _pareto_mean(xm, a), scale)


def pareto_split(target, a=4.1, xm=0.5):
    """Quasi-Gaussian ``Z + U`` for ``target`` with a Pareto(xm, a) residual of fixed shape.

    The scale of ``U`` matches the third central moment of the target, the
    Gaussian variance takes the remaining variance, and the shift matches the
    mean, so the first three moments agree exactly.

    Returns
    -------
    GaussianConvolution
    """
    m = target.raw_moments(3).values
    mean = m[1]
    var = m[2] - mean**2
    mu3 = m[3] - 3 * mean * m[2] + 2 * mean**3
    p_var = _pareto_var(xm, a)
    p_mu3 = pareto_skewness(a) * p_var**1.5
    if not mu3 > 0:
        raise SkewnessInfeasible("a Pareto residual needs a positive third central moment")
    scale = (mu3 / p_mu3) ** (1.0 / 3.0)
    var_z = var - scale**2 * p_var
    if var_z < 0:
        raise TargetNotSolvable(f"shape a={a} leaves a negative Gaussian variance {var_z:.6g}")
    shift = _pareto_mean(xm, a) - mean / scale
    return GaussianConvolution(var_z, ShiftedScaledPareto(xm, a, shift, scale))


def _moments_of(obj, K):
    if isinstance(obj, ConvolutionModel):
        return obj.moments().values[: K + 1]
    if isinstance(obj, DistributionSpec):
        return obj.raw_moments(K).values
    return _as_moments(obj)[: K + 1]


def verify_match(x_spec, y_model, K):
    """``max_{1 <= k <= K} |E X**k - E Y**k|``."""
    mx = _moments_of(x_spec, K)
    my = _moments_of(y_model, K)
    if mx.size < K + 1 or my.size < K + 1:
        raise ValueError(f"need moments up to order {K} on both sides")
    return float(np.max(np.abs(mx[1:] - my[1:]))) if K >= 1 else 0.0


# ---------------------------------------------------------------------------
# exact enumeration


def _as_law(law):
    if isinstance(law, FiniteAtomic):
        nodes, probs = np.asarray(law.nodes)[:, None], np.asarray(law.probs)
    elif isinstance(law, AtomicMeasure):
        nodes, probs = law.nodes[:, None], law.weights
    else:
        nodes, probs = law
        nodes = np.asarray(nodes, dtype=float)
        probs = np.asarray(probs, dtype=float)
        if nodes.ndim == 1:
            nodes = nodes[:, None]
    return nodes, probs


def product_law(x_law, w_law):
    """Law of ``X * eps`` for independent atomic ``X`` (vector) and ``eps`` (scalar)."""
    xn, xp = _as_law(x_law)
    wn, wp = _as_law(w_law)
    nodes = (xn[:, None, :] * wn[None, :, 0:1]).reshape(-1, xn.shape[1])
    probs = np.outer(xp, wp).ravel()
    return nodes, probs


def linear_form_monomials(a, k):
    """Expand ``(a . x)**k`` into ``[(coef, exponents), ...]``."""
    a = np.asarray(a, dtype=float)
    p = a.size
    out = []
    for exps in iproduct(range(k + 1), repeat=p):
        if sum(exps) != k:
            continue
        coef = factorial(k)
        for j, e in enumerate(exps):
            coef = coef / factorial(e) * a[j] ** e
        out.append((coef, exps))
    return out


def _normalize_poly(coeffs, p):
    items = coeffs.items() if isinstance(coeffs, dict) else [(e, c) for c, e in coeffs]
    out = []
    for exps, c in items:
        exps = tuple(int(e) for e in np.atleast_1d(exps))
        if len(exps) != p:
            raise ValueError(f"monomial {exps} does not match dimension {p}")
        out.append((float(c), exps))
    return out


def exact_poly_expectation(x_laws, coeffs, budget=10**6):
    """``E f(S_n)`` for ``S_n = n**-0.5 sum X_i`` by full enumeration.

    Parameters
    ----------
    x_laws : sequence
        ``n`` independent atomic laws: :class:`FiniteAtomic`, :class:`AtomicMeasure`
        or ``(nodes, probs)`` pairs with ``nodes`` of shape ``(s,)`` or ``(s, p)``.
    coeffs : list of (coef, exponents) or dict {exponents: coef}
        Sparse monomials of the polynomial ``f`` on ``R^p``.
    budget : int
        Largest admissible number of joint outcomes.
    """
    laws = [_as_law(l) for l in x_laws]
    if not laws:
        raise ValueError("need at least one law")
    p = laws[0][0].shape[1]
    total = 1
    for nodes, _ in laws:
        if nodes.shape[1] != p:
            raise ValueError("all laws must live in the same dimension")
        total *= nodes.shape[0]
    if total > budget:
        raise EnumerationBudgetExceeded(f"{total} joint outcomes exceed the budget {budget}")
    sums = np.zeros((1, p))
    probs = np.ones(1)
    for nodes, pr in laws:
        sums = (sums[:, None, :] + nodes[None, :, :]).reshape(-1, p)
        probs = np.outer(probs, pr).ravel()
    S = sums / sqrt(len(laws))
    total_val = 0.0
    for c, exps in _normalize_poly(coeffs, p):
        term = np.ones(S.shape[0])
        for j, e in enumerate(exps):
            if e:
                term = term * S[:, j] ** e
        total_val += c * float(np.dot(probs, term))
    return total_val
