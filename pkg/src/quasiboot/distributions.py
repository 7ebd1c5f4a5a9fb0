"""Scalar sampling laws with closed-form raw moments.

Every law is a frozen dataclass that can draw samples from a
:class:`numpy.random.Generator`, report its exact raw moments and print itself
in a small text grammar, for example::

    lognormal(sigma=1,std)
    chisq1c
    pareto(xm=0.5,a=4.1,shift=0.6612903225806451,scale=4.3336)
    gauss(mean=0,var=1)
    conv(var_z=0.05,atom=atomic(nodes=[-1,1],probs=[0.5,0.5]))

:func:`parse_spec` reads that grammar back; ``parse_spec(str(spec)) == spec``
holds for every law.
"""
from dataclasses import dataclass
from math import comb, exp, isfinite, sqrt
import re

import numpy as np

__all__ = [
    "MomentNotFinite",
    "MomentVector",
    "DistributionSpec",
    "Lognormal",
    "ChiSquare1",
    "ShiftedScaledPareto",
    "Gaussian",
    "GaussianConvolution",
    "FiniteAtomic",
    "sample_scalar",
    "sample_vector",
    "raw_moments",
    "standardize",
    "affine_moments",
    "gaussian_moments",
    "convolve_gaussian_moments",
    "double_factorial",
    "parse_spec",
    "format_number",
]


class MomentNotFinite(ValueError):
    """Requested a raw moment that does not exist for the law."""


def double_factorial(k):
    """(k)!! for k >= -1, with (-1)!! = 0!! = 1."""
    out = 1
    while k > 1:
        out *= k
        k -= 2
    return out


class MomentVector:
    """Raw moments ``m_0, ..., m_K`` of a scalar law, with ``m_0 = 1``.

    Parameters
    ----------
    moments : array_like
        The sequence ``m_0..m_K`` with ``K >= 2``.
    allow_short : bool
        Accept ``K < 2`` (used internally for low-order queries).
    """

    __slots__ = ("_m",)

    def __init__(self, moments, allow_short=False):
        m = np.array(moments, dtype=float).ravel()
        if m.size < (1 if allow_short else 3):
            raise ValueError("a moment vector needs at least m_0, m_1, m_2")
        if not np.all(np.isfinite(m)):
            raise ValueError("moments must be finite")
        if abs(m[0] - 1.0) > 1e-12:
            raise ValueError(f"m_0 must equal 1, got {m[0]!r}")
        m[0] = 1.0
        m.setflags(write=False)
        self._m = m

    @property
    def order(self):
        return self._m.size - 1

    @property
    def values(self):
        """Read-only numpy view of ``m_0..m_K``."""
        return self._m

    def truncate(self, K):
        if K > self.order:
            raise ValueError(f"cannot truncate order {self.order} vector to {K}")
        return MomentVector(self._m[: K + 1], allow_short=True)

    def __getitem__(self, k):
        return self._m[k]

    def __len__(self):
        return self._m.size

    def __iter__(self):
        return iter(self._m.tolist())

    def __eq__(self, other):
        if not isinstance(other, MomentVector):
            return NotImplemented
        return self._m.shape == other._m.shape and bool(np.all(self._m == other._m))

    def __repr__(self):
        return f"MomentVector({self._m.tolist()!r})"


def affine_moments(m, shift, scale):
    """Raw moments of ``(X - shift) * scale`` from raw moments ``m`` of X."""
    m = np.asarray(m, dtype=float)
    out = np.empty_like(m)
    for k in range(m.size):
        acc = 0.0
        for j in range(k + 1):
            acc += comb(k, j) * m[j] * (-shift) ** (k - j)
        out[k] = acc * scale**k
    return out


def gaussian_moments(mean, var, K):
    """Raw moments of N(mean, var) up to order K (numpy array)."""
    m = np.zeros(K + 1)
    m[0] = 1.0
    if K >= 1:
        m[1] = mean
    for k in range(2, K + 1):
        m[k] = mean * m[k - 1] + (k - 1) * var * m[k - 2]
    return m


def convolve_gaussian_moments(var_z, u):
    """Raw moments of ``Z + U`` with ``Z ~ N(0, var_z)`` independent of U.

    ``m_k = sum_{2l <= k} C(k, 2l) (2l-1)!! var_z**l u_{k-2l}``.
    """
    u = np.asarray(u, dtype=float)
    m = np.empty_like(u)
    for k in range(u.size):
        acc = 0.0
        for l in range(k // 2 + 1):
            acc += comb(k, 2 * l) * double_factorial(2 * l - 1) * var_z**l * u[k - 2 * l]
        m[k] = acc
    return m


def format_number(x):
    """Shortest text that parses back to exactly the same float."""
    x = float(x)
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


class DistributionSpec:
    """Base class of the scalar laws.

    Subclasses implement ``sample``, ``_raw_moments`` and ``__str__``.
    """

    #: largest order with a finite raw moment (``inf`` when all exist)
    max_order = float("inf")

    def sample(self, rng, size=None):
        raise NotImplementedError

    def _raw_moments(self, K):
        raise NotImplementedError

    def raw_moments(self, K):
        """Exact raw moments ``m_0..m_K`` as a :class:`MomentVector`."""
        if K < 0:
            raise ValueError("K must be non-negative")
        if K > self.max_order:
            raise MomentNotFinite(
                f"{self} has finite raw moments only up to order {self.max_order}, asked for {K}"
            )
        return MomentVector(self._raw_moments(K), allow_short=True)

    def mean(self):
        return float(self._raw_moments(1)[1])

    def variance(self):
        m = self._raw_moments(2)
        return float(m[2] - m[1] ** 2)


def _require(cond, msg):
    if not cond:
        raise ValueError(msg)


@dataclass(frozen=True)
class Lognormal(DistributionSpec):
    """``exp(N(0, sigma**2))`` and its centered / standardized versions.

    ``mode`` is ``"raw"`` for the plain lognormal, ``"centered"`` for
    ``L - exp(sigma**2 / 2)`` and ``"std"`` for ``(L - mean) / sd``.
    """

    sigma: float
    mode: str = "std"

    def __post_init__(self):
        _require(self.sigma > 0 and isfinite(self.sigma), "lognormal sigma must be positive")
        _require(self.mode in ("raw", "centered", "std"), f"unknown lognormal mode {self.mode!r}")

    def _base_shift_scale(self):
        s2 = self.sigma**2
        if self.mode == "raw":
            return 0.0, 1.0
        mean = exp(s2 / 2)
        if self.mode == "centered":
            return mean, 1.0
        return mean, 1.0 / sqrt((exp(s2) - 1.0) * exp(s2))

    def sample(self, rng, size=None):
        shift, scale = self._base_shift_scale()
        x = np.exp(self.sigma * rng.standard_normal(size))
        return (x - shift) * scale

    def _raw_moments(self, K):
        base = np.array([exp(k * k * self.sigma**2 / 2) for k in range(K + 1)])
        shift, scale = self._base_shift_scale()
        return affine_moments(base, shift, scale)

    def __str__(self):
        flag = "" if self.mode == "raw" else f",{self.mode}"
        return f"lognormal(sigma={format_number(self.sigma)}{flag})"


@dataclass(frozen=True)
class ChiSquare1(DistributionSpec):
    """Chi-squared law with one degree of freedom; ``centered`` subtracts 1."""

    centered: bool = True

    def sample(self, rng, size=None):
        z = rng.standard_normal(size)
        return z * z - 1.0 if self.centered else z * z

    def _raw_moments(self, K):
        # E(z^2)^k = (2k-1)!!
        base = np.array([float(double_factorial(2 * k - 1)) for k in range(K + 1)])
        return affine_moments(base, 1.0, 1.0) if self.centered else base

    def __str__(self):
        return "chisq1c" if self.centered else "chisq1"


@dataclass(frozen=True)
class ShiftedScaledPareto(DistributionSpec):
    """``(Pareto(xm, a) - shift) * scale``; the Pareto density is ``a xm^a / x^(a+1)`` on ``x >= xm``."""

    xm: float
    a: float
    shift: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        _require(self.xm > 0 and isfinite(self.xm), "pareto xm must be positive")
        _require(self.a > 4 and isfinite(self.a), "pareto shape a must exceed 4 (finite fourth moment)")
        _require(isfinite(self.shift) and isfinite(self.scale), "pareto shift/scale must be finite")

    @property
    def max_order(self):
        # moments of order k < a exist
        k = int(np.ceil(self.a)) - 1
        return k

    def pareto_moment(self, k):
        """``E Pareto(xm, a)^k = a xm^k / (a - k)`` for ``k < a``."""
        if k >= self.a:
            raise MomentNotFinite(f"Pareto moment of order {k} is infinite for a={self.a}")
        return self.a * self.xm**k / (self.a - k)

    def sample(self, rng, size=None):
        u = 1.0 - rng.random(size)  # in (0, 1]
        return (self.xm * u ** (-1.0 / self.a) - self.shift) * self.scale

    def _raw_moments(self, K):
        base = np.array([self.pareto_moment(k) for k in range(K + 1)])
        return affine_moments(base, self.shift, self.scale)

    def __str__(self):
        return (
            f"pareto(xm={format_number(self.xm)},a={format_number(self.a)},"
            f"shift={format_number(self.shift)},scale={format_number(self.scale)})"
        )


@dataclass(frozen=True)
class Gaussian(DistributionSpec):
    mean: float = 0.0
    var: float = 1.0

    def __post_init__(self):
        _require(self.var >= 0 and isfinite(self.var), "gaussian variance must be non-negative")
        _require(isfinite(self.mean), "gaussian mean must be finite")

    def sample(self, rng, size=None):
        return self.mean + sqrt(self.var) * rng.standard_normal(size)

    def _raw_moments(self, K):
        return gaussian_moments(self.mean, self.var, K)

    def __str__(self):
        return f"gauss(mean={format_number(self.mean)},var={format_number(self.var)})"


@dataclass(frozen=True)
class GaussianConvolution(DistributionSpec):
    """Law of ``Z + U`` with ``Z ~ N(0, var_z)`` independent of ``U ~ atom``."""

    var_z: float
    atom: DistributionSpec

    def __post_init__(self):
        _require(self.var_z >= 0 and isfinite(self.var_z), "var_z must be non-negative")
        _require(isinstance(self.atom, DistributionSpec), "atom must be a DistributionSpec")

    @property
    def max_order(self):
        return self.atom.max_order

    def sample(self, rng, size=None):
        u = self.atom.sample(rng, size)
        return u + sqrt(self.var_z) * rng.standard_normal(size)

    def _raw_moments(self, K):
        return convolve_gaussian_moments(self.var_z, self.atom.raw_moments(K).values)

    def __str__(self):
        return f"conv(var_z={format_number(self.var_z)},atom={self.atom})"


@dataclass(frozen=True)
class FiniteAtomic(DistributionSpec):
    """Discrete law putting mass ``probs[i]`` on ``nodes[i]``."""

    nodes: tuple
    probs: tuple

    def __post_init__(self):
        nodes = tuple(float(x) for x in np.atleast_1d(self.nodes))
        probs = tuple(float(x) for x in np.atleast_1d(self.probs))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "probs", probs)
        _require(len(nodes) > 0 and len(nodes) == len(probs), "nodes and probs must have equal, positive length")
        _require(all(isfinite(x) for x in nodes), "nodes must be finite")
        _require(all(q >= 0 for q in probs), "probs must be non-negative")
        _require(abs(sum(probs) - 1.0) <= 1e-12, "probs must sum to 1")
        _require(len(set(nodes)) == len(nodes), "nodes must be distinct")

    def sample(self, rng, size=None):
        cdf = np.cumsum(self.probs)
        u = rng.random(size)
        idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(self.nodes) - 1)
        return np.asarray(self.nodes)[idx]

    def _raw_moments(self, K):
        x = np.asarray(self.nodes)
        w = np.asarray(self.probs)
        return np.array([np.dot(w, x**k) for k in range(K + 1)])

    def __str__(self):
        nodes = ",".join(format_number(x) for x in self.nodes)
        probs = ",".join(format_number(q) for q in self.probs)
        return f"atomic(nodes=[{nodes}],probs=[{probs}])"


def sample_scalar(spec, rng):
    """One draw from ``spec``."""
    return float(spec.sample(rng))


def sample_vector(spec, p, rng):
    """``p`` i.i.d. draws from ``spec`` forming one random vector."""
    if p < 1:
        raise ValueError("p must be a positive integer")
    return np.asarray(spec.sample(rng, p), dtype=float)


def raw_moments(spec, K):
    return spec.raw_moments(K)


def standardize(spec):
    """Return ``(shift, scale)`` such that ``(X - shift) * scale`` has mean 0 and variance 1."""
    m = spec.raw_moments(2)
    var = m[2] - m[1] ** 2
    if not var > 0:
        raise ValueError(f"{spec} has zero variance and cannot be standardized")
    return float(m[1]), 1.0 / sqrt(var)


# ---------------------------------------------------------------------------
# text grammar

_TOKEN = re.compile(r"\s*(?:(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf|nan)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<sym>[\[\]\(\),=]))")


class _Parser:
    def __init__(self, text):
        self.toks = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                raise ValueError(f"cannot parse {text!r} at position {pos}")
            kind = m.lastgroup
            self.toks.append((kind, m.group(kind)))
            pos = m.end()
            while pos < len(text) and text[pos].isspace():
                pos += 1
        self.i = 0
        self.text = text

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            raise ValueError(f"unexpected token {tok[1]!r} in {self.text!r}")
        self.i += 1
        return tok[1]

    def value(self):
        kind, val = self.peek()
        if kind == "num":
            self.i += 1
            return float(val)
        if kind == "sym" and val == "[":
            self.i += 1
            items = []
            if self.peek() != ("sym", "]"):
                items.append(float(self.take("num")))
                while self.peek() == ("sym", ","):
                    self.i += 1
                    items.append(float(self.take("num")))
            self.take("sym", "]")
            return items
        if kind == "name":
            return self.call()
        raise ValueError(f"unexpected token {val!r} in {self.text!r}")

    def call(self):
        name = self.take("name")
        kwargs, flags = {}, []
        if self.peek() == ("sym", "("):
            self.i += 1
            if self.peek() != ("sym", ")"):
                while True:
                    key = self.take("name")
                    if self.peek() == ("sym", "="):
                        self.i += 1
                        kwargs[key] = self.value()
                    else:
                        flags.append(key)
                    if self.peek() == ("sym", ","):
                        self.i += 1
                        continue
                    break
            self.take("sym", ")")
        return name, kwargs, flags


def _build(name, kwargs, flags):
    def num(key, default=None):
        if key not in kwargs:
            if default is None:
                raise ValueError(f"{name}(...) needs {key}=")
            return default
        val = kwargs.pop(key)
        if not isinstance(val, float):
            raise ValueError(f"{name}: {key} must be a number")
        return val

    if name == "lognormal":
        sigma = num("sigma")
        mode = "raw"
        for f in flags:
            if f not in ("std", "centered", "raw"):
                raise ValueError(f"unknown lognormal flag {f!r}")
            mode = f
        flags = []
        spec = Lognormal(sigma, mode)
    elif name in ("chisq1c", "chisq1"):
        spec = ChiSquare1(centered=name == "chisq1c")
    elif name == "pareto":
        spec = ShiftedScaledPareto(num("xm"), num("a"), num("shift", 0.0), num("scale", 1.0))
    elif name == "gauss":
        spec = Gaussian(num("mean", 0.0), num("var", 1.0))
    elif name == "conv":
        var_z = num("var_z")
        atom = kwargs.pop("atom", None)
        if not isinstance(atom, tuple):
            raise ValueError("conv(...) needs atom=<distribution>")
        spec = GaussianConvolution(var_z, _build(*atom))
    elif name == "atomic":
        nodes, probs = kwargs.pop("nodes", None), kwargs.pop("probs", None)
        if not isinstance(nodes, list) or not isinstance(probs, list):
            raise ValueError("atomic(...) needs nodes=[...] and probs=[...]")
        spec = FiniteAtomic(tuple(nodes), tuple(probs))
    else:
        raise ValueError(f"unknown distribution {name!r}")
    if kwargs or flags:
        raise ValueError(f"unexpected arguments for {name}: {sorted(kwargs) + flags}")
    return spec


def parse_spec(text):
    """Parse the canonical text form of a :class:`DistributionSpec`."""
    parser = _Parser(text)
    spec = _build(*parser.call())
    if parser.peek()[0] is not None:
        raise ValueError(f"trailing input in {text!r}")
    return spec
