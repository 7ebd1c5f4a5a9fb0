"""Bootstrap multiplier laws.

A weight law ``eps`` used for the weighted bootstrap should satisfy
``E eps = 0``, ``E eps**2 = 1``, ``E eps**3 = 1`` and ``E eps**4 < inf``.
Every scheme here is a Gaussian part plus an independent non-Gaussian part,
``eps = sqrt(var_z) * z + u``, which makes the moments available in closed
form. :class:`PureGaussian` is the deliberate exception (``E eps**3 = 0``) and
serves as the baseline in coverage comparisons.
"""
from dataclasses import dataclass, field
from math import isfinite, sqrt

import numpy as np

from .distributions import (
    DistributionSpec,
    FiniteAtomic,
    affine_moments,
    convolve_gaussian_moments,
    format_number,
    parse_spec,
)

__all__ = [
    "InfeasibleMixture",
    "WeightScheme",
    "ExpMix",
    "ChiSqMix",
    "BernoulliMix",
    "PureGaussian",
    "Custom",
    "ValidationReport",
    "draw_weights",
    "scheme_moments",
    "solve_bernoulli_mix",
    "validate_scheme",
    "two_point_surrogate",
    "parse_scheme",
    "BERNOULLI_FEASIBLE_MAX",
]

#: largest b for which the Bernoulli mixture has a non-negative Gaussian part
BERNOULLI_FEASIBLE_MAX = (5.0 - sqrt(5.0)) / 10.0


class InfeasibleMixture(ValueError):
    """The Bernoulli mixture would need a negative Gaussian variance."""


class WeightScheme:
    """Base class. Subclasses define ``var_z``, ``_draw_u`` and ``_u_moments``."""

    def _draw_u(self, rng, size):
        raise NotImplementedError

    def _u_moments(self):
        """Raw moments ``u_0..u_4`` of the non-Gaussian part."""
        raise NotImplementedError

    def draw(self, rng, size):
        """I.i.d. weights of the given shape.

        The Gaussian part is drawn first, then the non-Gaussian part.
        """
        z = rng.standard_normal(size)
        u = self._draw_u(rng, size)
        if self.var_z == 0.0:
            return u
        return sqrt(self.var_z) * z + u

    def moments(self):
        """Exact ``(m1, m2, m3, m4)``."""
        m = convolve_gaussian_moments(self.var_z, self._u_moments())
        return tuple(float(x) for x in m[1:5])


def _chi2_1_raw():
    return np.array([1.0, 1.0, 3.0, 15.0, 105.0])


def _exp1_raw():
    return np.array([1.0, 1.0, 2.0, 6.0, 24.0])


@dataclass(frozen=True)
class ExpMix(WeightScheme):
    """``sqrt(1 - 2**(-2/3)) z + 2**(-1/3) (e - 1)`` with ``e ~ exp(1)``."""

    @property
    def var_z(self):
        return 1.0 - 2.0 ** (-2.0 / 3.0)

    def _draw_u(self, rng, size):
        return 2.0 ** (-1.0 / 3.0) * (rng.standard_exponential(size) - 1.0)

    def _u_moments(self):
        return affine_moments(_exp1_raw(), 1.0, 2.0 ** (-1.0 / 3.0))

    def __str__(self):
        return "expmix"


@dataclass(frozen=True)
class ChiSqMix(WeightScheme):
    """``z / sqrt(2) + (c - 1) / 2`` with ``c ~ chi2_1``."""

    @property
    def var_z(self):
        return 0.5

    def _draw_u(self, rng, size):
        c = rng.standard_normal(size)
        return 0.5 * (c * c - 1.0)

    def _u_moments(self):
        return affine_moments(_chi2_1_raw(), 1.0, 0.5)

    def __str__(self):
        return "chisqmix"


def solve_bernoulli_mix(b):
    """Solve the Bernoulli mixture ``z + sigma_u (B(b) - b)`` for the target moments.

    ``sigma_u = (b (1-b) (1-2b))**(-1/3)`` makes the third moment 1 and
    ``var_z = 1 - b (1-b) sigma_u**2`` makes the variance 1.

    Parameters
    ----------
    b : float
        Success probability, ``0 < b < 1/2``.

    Returns
    -------
    sigma_u, var_z : float

    Raises
    ------
    InfeasibleMixture
        If ``var_z < 0``, which happens for ``b > (5 - sqrt(5)) / 10``.
    """
    if not 0.0 < b < 0.5:
        raise ValueError(f"b must lie in (0, 1/2), got {b!r}")
    q = b * (1.0 - b)
    sigma_u = (q * (1.0 - 2.0 * b)) ** (-1.0 / 3.0)
    var_z = 1.0 - q * sigma_u**2
    if var_z < 0.0:
        if var_z > -1e-14:
            var_z = 0.0
        else:
            raise InfeasibleMixture(
                f"b={b!r} needs var_z={var_z:.6g} < 0; feasible b lie in (0, {BERNOULLI_FEASIBLE_MAX:.6f}]"
            )
    return sigma_u, var_z


@dataclass(frozen=True)
class BernoulliMix(WeightScheme):
    """``z + sigma_u (B - b)``, ``B ~ Bernoulli(b)``, ``z ~ N(0, var_z)``."""

    b: float
    sigma_u: float = field(init=False, repr=False, compare=False)
    _var_z: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sigma_u, var_z = solve_bernoulli_mix(self.b)
        object.__setattr__(self, "sigma_u", sigma_u)
        object.__setattr__(self, "_var_z", var_z)

    @property
    def var_z(self):
        return self._var_z

    def _draw_u(self, rng, size):
        hit = rng.random(size) < self.b
        return self.sigma_u * (hit - self.b)

    def _u_moments(self):
        b, s = self.b, self.sigma_u
        # B - b takes 1-b w.p. b and -b w.p. 1-b
        return np.array([b * (1 - b) ** k + (1 - b) * (-b) ** k for k in range(5)]) * s ** np.arange(5)

    def __str__(self):
        return f"bernmix(b={format_number(self.b)})"


@dataclass(frozen=True)
class PureGaussian(WeightScheme):
    """Standard normal weights; third moment 0."""

    @property
    def var_z(self):
        return 1.0

    def draw(self, rng, size):
        return rng.standard_normal(size)

    def _u_moments(self):
        return np.array([1.0, 0.0, 0.0, 0.0, 0.0])

    def __str__(self):
        return "gauss"


@dataclass(frozen=True)
class Custom(WeightScheme):
    """``sqrt(var_z) z + U`` with ``U ~ atom``."""

    var_z: float
    atom: DistributionSpec

    def __post_init__(self):
        if not (self.var_z >= 0 and isfinite(self.var_z)):
            raise ValueError("var_z must be non-negative")
        if not isinstance(self.atom, DistributionSpec):
            raise ValueError("atom must be a DistributionSpec")

    def _draw_u(self, rng, size):
        return self.atom.sample(rng, size)

    def _u_moments(self):
        return self.atom.raw_moments(4).values

    def __str__(self):
        return f"custom(var_z={format_number(self.var_z)},atom={self.atom})"


def two_point_surrogate():
    """Two-point law with moments exactly ``(0, 1, 1, 2)``.

    Mass ``(5 - sqrt 5) / 10`` at ``(1 + sqrt 5) / 2`` and the rest at
    ``(1 - sqrt 5) / 2``; the Bernoulli mixture at ``var_z = 0``.
    """
    q = BERNOULLI_FEASIBLE_MAX
    s5 = sqrt(5.0)
    return FiniteAtomic(((1.0 - s5) / 2.0, (1.0 + s5) / 2.0), (1.0 - q, q))


def draw_weights(scheme, n, rng):
    """``n`` i.i.d. multipliers (``n`` may also be a shape tuple)."""
    return np.asarray(scheme.draw(rng, n), dtype=float)


def scheme_moments(scheme):
    return scheme.moments()


@dataclass(frozen=True)
class ValidationReport:
    scheme: str
    moments: tuple
    tol: float
    mean_ok: bool
    variance_ok: bool
    third_ok: bool
    fourth_finite: bool

    @property
    def passed(self):
        return self.mean_ok and self.variance_ok and self.third_ok and self.fourth_finite

    def as_dict(self):
        m1, m2, m3, m4 = self.moments
        return {
            "scheme": self.scheme,
            "m1": m1,
            "m2": m2,
            "m3": m3,
            "m4": m4,
            "tol": self.tol,
            "mean_ok": self.mean_ok,
            "variance_ok": self.variance_ok,
            "third_ok": self.third_ok,
            "fourth_finite": self.fourth_finite,
            "passed": self.passed,
        }


def validate_scheme(scheme, tol=1e-12):
    """Check the analytic moments against ``(0, 1, 1, finite)``.

    Failure is reported in the returned :class:`ValidationReport`, never raised.
    """
    m1, m2, m3, m4 = scheme.moments()
    return ValidationReport(
        scheme=str(scheme),
        moments=(m1, m2, m3, m4),
        tol=tol,
        mean_ok=abs(m1) <= tol,
        variance_ok=abs(m2 - 1.0) <= tol,
        third_ok=abs(m3 - 1.0) <= tol,
        fourth_finite=isfinite(m4),
    )


def parse_scheme(text):
    """Parse ``expmix``, ``chisqmix``, ``bernmix(b=...)``, ``gauss`` or ``custom(var_z=...,atom=...)``."""
    t = text.strip()
    if t == "expmix":
        return ExpMix()
    if t == "chisqmix":
        return ChiSqMix()
    if t in ("gauss", "gauss()"):
        return PureGaussian()
    if t.startswith("bernmix"):
        inner = t[len("bernmix"):].strip()
        if not (inner.startswith("(") and inner.endswith(")")):
            raise ValueError(f"cannot parse weight scheme {text!r}")
        key, _, val = inner[1:-1].partition("=")
        if key.strip() != "b":
            raise ValueError(f"bernmix needs b=, got {text!r}")
        return BernoulliMix(float(val))
    if t.startswith("custom"):
        # reuse the distribution grammar: custom(...) has the same shape as conv(...)
        conv = parse_spec("conv" + t[len("custom"):])
        return Custom(conv.var_z, conv.atom)
    raise ValueError(f"unknown weight scheme {text!r}")
