"""Empirical c.d.f.s, Kolmogorov-Smirnov distances, chi-squared c.d.f. and
Gaussian shell probabilities."""
from dataclasses import dataclass
from math import lgamma, log, sqrt

import numpy as np
from scipy.special import ndtr

__all__ = [
    "EmpiricalCdf",
    "ks_two_sample",
    "ks_to_reference",
    "normal_cdf",
    "regularized_gamma_p",
    "chi_squared_cdf",
    "chi_density",
    "gaussian_shell_prob",
    "anti_concentration_sup",
]

_EPS = 1e-16
_MAX_ITER = 10000


@dataclass(frozen=True)
class EmpiricalCdf:
    """Right-continuous empirical c.d.f. ``F(t) = #{x <= t} / N``."""

    values: np.ndarray

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float).ravel())
        if v.size == 0:
            raise ValueError("empirical c.d.f. of an empty sample")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def size(self):
        return self.values.size

    def __call__(self, t):
        return np.searchsorted(self.values, t, side="right") / self.values.size

    def left_limit(self, t):
        return np.searchsorted(self.values, t, side="left") / self.values.size


def _ecdf(a):
    return a if isinstance(a, EmpiricalCdf) else EmpiricalCdf(a)


def ks_two_sample(a, b):
    """``sup_t |F_a(t) - F_b(t)|``, evaluated on the merged jump set."""
    a, b = _ecdf(a), _ecdf(b)
    jumps = np.concatenate([a.values, b.values])
    return float(np.max(np.abs(a(jumps) - b(jumps))))


def ks_to_reference(a, ref):
    """``sup_t |F_a(t) - ref(t)|`` for a continuous reference c.d.f. ``ref``."""
    a = _ecdf(a)
    x = a.values
    F = np.asarray(ref(x), dtype=float)
    return float(max(np.max(np.abs(a(x) - F)), np.max(np.abs(a.left_limit(x) - F))))


def normal_cdf(x, mean=0.0, var=1.0):
    return ndtr((np.asarray(x, dtype=float) - mean) / sqrt(var))


def _gamma_series(a, x):
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum_k x^k / ((a+1)...(a+k))
    term = np.full_like(x, 1.0 / a)
    total = term.copy()
    active = np.ones(x.shape, dtype=bool)
    n = 0
    while active.any() and n < _MAX_ITER:
        n += 1
        term = np.where(active, term * x / (a + n), term)
        total = np.where(active, total + term, total)
        active &= np.abs(term) > np.abs(total) * _EPS
    with np.errstate(divide="ignore"):
        logpre = -x + a * np.log(x) - lgamma(a)
    return total * np.exp(logpre)


def _gamma_cfrac(a, x):
    # Q(a, x) by modified Lentz on the continued fraction of Gamma(a, x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    i = 0
    while active.any() and i < _MAX_ITER:
        i += 1
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > _EPS
    return np.exp(-x + a * np.log(x) - lgamma(a)) * h


def regularized_gamma_p(a, x):
    """Regularized lower incomplete gamma ``P(a, x) = gamma(a, x) / Gamma(a)``.

    Power series for ``x < a + 1`` and a continued fraction for ``1 - P``
    otherwise.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.zeros_like(x)
    pos = x > 0
    lo = pos & (x < a + 1.0)
    hi = pos & ~lo
    if lo.any():
        out[lo] = _gamma_series(a, x[lo])
    if hi.any():
        out[hi] = 1.0 - _gamma_cfrac(a, x[hi])
    out[np.isposinf(x)] = 1.0
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if scalar else out


def chi_squared_cdf(p, x):
    """c.d.f. of chi-squared with ``p`` degrees of freedom."""
    if p < 1:
        raise ValueError("p must be a positive integer")
    return regularized_gamma_p(p / 2.0, np.asarray(x, dtype=float) / 2.0)


def chi_density(p, r):
    """Density of ``||Z||`` for ``Z ~ N(0, I_p)``."""
    r = np.asarray(r, dtype=float)
    rr = np.where(r > 0, r, 1.0)
    logf = (p - 1) * np.log(rr) - rr * rr / 2.0 - (p / 2.0 - 1.0) * log(2.0) - lgamma(p / 2.0)
    at_zero = sqrt(2.0 / np.pi) if p == 1 else 0.0
    return np.where(r > 0, np.exp(logf), np.where(r == 0, at_zero, 0.0))


def gaussian_shell_prob(p, r, eps):
    """``P(r <= ||Z|| <= r + eps)`` for ``Z ~ N(0, I_p)``."""
    r = np.asarray(r, dtype=float)
    return chi_squared_cdf(p, (r + eps) ** 2) - chi_squared_cdf(p, r**2)


def anti_concentration_sup(p, eps, resolution=None):
    """``max_r P(r <= ||Z|| <= r + eps) / eps`` over a grid on ``[0, sqrt(p) + 10]``.

    Parameters
    ----------
    p : int
    eps : float
        Shell width.
    resolution : float, optional
        Grid step, at most ``eps / 10`` (the default).
    """
    if resolution is None:
        resolution = eps / 10.0
    if resolution > eps / 10.0 * (1 + 1e-12):
        raise ValueError("grid resolution must be at most eps / 10")
    r_max = sqrt(p) + 10.0
    steps = int(np.ceil(r_max / resolution))
    r = np.arange(steps + 1) * resolution
    if abs(eps / resolution - round(eps / resolution)) < 1e-9:
        # r + eps falls on the grid: one c.d.f. evaluation per point
        k = int(round(eps / resolution))
        ext = np.arange(steps + k + 1) * resolution
        F = chi_squared_cdf(p, ext**2)
        shell = F[k:] - F[: steps + 1]
    else:
        shell = gaussian_shell_prob(p, r, eps)
    return float(np.max(shell) / eps)
