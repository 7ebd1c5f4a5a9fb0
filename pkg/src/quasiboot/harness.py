"""Declarative Monte Carlo experiments.

Every experiment is described by an :class:`ExperimentConfig`, usually read
from a flat ``key = value`` file. Monte Carlo repetitions draw from their own
counter-based stream ``make_stream(seed, kind, r)``, so results do not depend
on the number of worker threads or on scheduling.

Within a coverage repetition the stream is consumed in a fixed order: the
``(n, p)`` sample first, then the ``(B, n)`` weight matrix (Gaussian part
before the non-Gaussian part). Two runs with the same seed and different
weight schemes therefore see the same samples.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
import os
from pathlib import Path

import numpy as np

from .analysis import chi_squared_cdf, ks_to_reference, ks_two_sample, normal_cdf
from .bootstrap import bootstrap_replicate_norms, upper_quantiles_sorted
from .distributions import DistributionSpec, GaussianConvolution, affine_moments, parse_spec
from .moment_match import (
    deconvolve_moments,
    fit_shifted_pareto,
    hankel_solvable,
    max_gaussian_variance,
    pareto_split,
    verify_match,
)
from .regression import RegressionModel, fourier_design, gaussian_design, regression_rep
from .rng import make_stream
from .tables import CdfDataset, CoverageTable, emit
from .weights import BernoulliMix, parse_scheme, validate_scheme

__all__ = [
    "ConfigError",
    "BudgetExceeded",
    "ExperimentConfig",
    "DEFAULT_LEVELS",
    "DEFAULT_MAX_WORK",
    "parse_config",
    "load_config",
    "run_coverage",
    "run_cdf_experiment",
    "run_regression_coverage",
    "run_weights_check",
    "run_moment_fit",
    "run",
    "emit",
]

KINDS = ("coverage", "cdf", "regression", "weights-check", "moment-fit")

#: confidence levels of the coverage table
DEFAULT_LEVELS = (0.975, 0.95, 0.90, 0.85, 0.80, 0.70, 0.60, 0.50)

#: ceiling on R * B * n * p before ``force`` is needed
DEFAULT_MAX_WORK = 2e11

_CHUNK = 25
_CDF_BLOCK = 500


class ConfigError(ValueError):
    """Invalid or inconsistent experiment description."""


class BudgetExceeded(RuntimeError):
    """The requested run is larger than the configured work ceiling."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment.

    ``alphas`` are the upper-tail levels; the coverage table reports
    ``1 - alpha``. ``y_model`` (cdf only) defaults to the Pareto split of
    ``x_dist``. ``x_dist`` is the error law for regression experiments.
    """

    kind: str
    n: int = 50
    p: int = 5
    R: int = 7000
    B: int = 1000
    alphas: tuple = tuple(round(1.0 - lv, 12) for lv in DEFAULT_LEVELS)
    x_dist: DistributionSpec = None
    scheme: object = field(default_factory=lambda: BernoulliMix(0.276))
    y_model: GaussianConvolution = None
    design: str = "gaussian"
    mode: str = "oracle"
    N: int = 15000
    K: int = 4
    seed: int = 0
    threads: object = 1
    out: str = None
    max_work: float = DEFAULT_MAX_WORK

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        for name in ("n", "p", "R", "B", "N", "K"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        a = tuple(float(x) for x in self.alphas)
        if not a or not all(0.0 < x < 1.0 for x in a):
            raise ConfigError("alphas must lie in (0, 1)")
        if any(x >= y for x, y in zip(a, a[1:])):
            raise ConfigError("alphas must be strictly increasing (levels strictly decreasing)")
        object.__setattr__(self, "alphas", a)
        if self.kind in ("coverage", "cdf", "regression", "moment-fit") and self.x_dist is None:
            raise ConfigError(f"kind {self.kind} needs x_dist")
        if self.design not in ("gaussian", "fourier"):
            raise ConfigError(f"design must be gaussian or fourier, got {self.design!r}")
        if self.mode not in ("oracle", "residuals"):
            raise ConfigError(f"mode must be oracle or residuals, got {self.mode!r}")
        if not (self.threads == "auto" or (isinstance(self.threads, (int, np.integer)) and self.threads >= 1)):
            raise ConfigError(f"threads must be a positive integer or auto, got {self.threads!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")

    @property
    def levels(self):
        return tuple(1.0 - a for a in self.alphas)

    @property
    def work(self):
        """``R * B * n * p``, the size measure checked by the budget guard."""
        return float(self.R) * self.B * self.n * self.p

    def n_threads(self):
        if self.threads == "auto":
            return os.cpu_count() or 1
        return int(self.threads)


_INT_KEYS = {"n", "p", "R", "B", "N", "K", "seed"}
_ALIASES = {"reps": "R", "boot": "B"}


def _split_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def parse_config(text, **overrides):
    """Build an :class:`ExperimentConfig` from ``key = value`` lines.

    Blank lines and ``#`` comments are ignored. Distribution and scheme
    values use their canonical text forms. Confidence levels may be given
    as ``levels = 0.95, 0.9`` or directly as ``alphas = 0.05, 0.1``.
    Keyword ``overrides`` (``None`` values skipped) win over the file.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    for k, v in overrides.items():
        if v is not None:
            raw[_ALIASES.get(k, k)] = v
    if "kind" not in raw:
        raise ConfigError("missing key 'kind'")
    if "levels" in raw and "alphas" in raw:
        raise ConfigError("give either levels or alphas, not both")
    kw = {}
    try:
        for key, value in raw.items():
            if key in _INT_KEYS:
                kw[key] = int(value)
            elif key == "kind" or key == "design" or key == "mode" or key == "out":
                kw[key] = str(value)
            elif key == "threads":
                kw[key] = value if value == "auto" else int(value)
            elif key == "max_work":
                kw[key] = float(value)
            elif key == "levels":
                lv = value if isinstance(value, (list, tuple)) else [float(x) for x in _split_list(value)]
                kw["alphas"] = tuple(sorted(round(1.0 - float(x), 12) for x in lv))
            elif key == "alphas":
                al = value if isinstance(value, (list, tuple)) else [float(x) for x in _split_list(value)]
                kw["alphas"] = tuple(sorted(float(x) for x in al))
            elif key == "x_dist":
                kw[key] = value if isinstance(value, DistributionSpec) else parse_spec(value)
            elif key == "y_model":
                if value != "auto":
                    y = value if isinstance(value, DistributionSpec) else parse_spec(value)
                    if not isinstance(y, GaussianConvolution):
                        raise ConfigError("y_model must be a conv(...) law")
                    kw[key] = y
            elif key == "scheme":
                kw[key] = value if not isinstance(value, str) else parse_scheme(value)
            else:
                raise ConfigError(f"unknown key {key!r}")
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return ExperimentConfig(**kw)


def load_config(path, **overrides):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, **overrides)


def _check_budget(config, force):
    if not force and config.work > config.max_work:
        raise BudgetExceeded(
            f"R*B*n*p = {config.work:.3g} exceeds the ceiling {config.max_work:.3g}; rerun with --force"
        )


def _map_ordered(fn, tasks, threads):
    """``[fn(t) for t in tasks]`` on a thread pool; results keep task order."""
    tasks = list(tasks)
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def _chunks(R):
    return [range(s, min(s + _CHUNK, R)) for s in range(0, R, _CHUNK)]


def coverage_rep(config, r):
    """Indicators ``||S_n|| <= Q^b(alpha)`` of repetition ``r``, one per alpha."""
    rng = make_stream(config.seed, "coverage", r)
    X = np.asarray(config.x_dist.sample(rng, (config.n, config.p)), dtype=float)
    stat = np.linalg.norm(X.sum(axis=0)) / np.sqrt(config.n)
    W = config.scheme.draw(rng, (config.B, config.n))
    reps = np.sort(bootstrap_replicate_norms(X, W))
    return stat <= upper_quantiles_sorted(reps, config.alphas)


def run_coverage(config, force=False):
    """Coverage frequencies of ``||S_n|| <= Q^b(alpha)`` over ``R`` repetitions.

    Raises
    ------
    BudgetExceeded
        If ``R * B * n * p`` exceeds ``config.max_work`` and ``force`` is false.
    """
    if config.kind != "coverage":
        raise ConfigError(f"run_coverage needs kind=coverage, got {config.kind}")
    _check_budget(config, force)

    def task(reps):
        h = np.zeros(len(config.alphas), dtype=np.int64)
        for r in reps:
            h += coverage_rep(config, r)
        return h

    hits = np.sum(_map_ordered(task, _chunks(config.R), config.n_threads()), axis=0)
    return CoverageTable.from_hits(
        "coverage", config.n, config.p, config.x_dist, config.scheme, config.alphas, hits, config.R, config.B, config.seed
    )


def _y_model(config):
    y = config.y_model if config.y_model is not None else pareto_split(config.x_dist)
    order = min(4, y.atom.max_order)
    u = y.atom.raw_moments(order).values
    if order >= 2 and not hankel_solvable(u):
        raise ConfigError("the residual of y_model is not a valid moment sequence")
    return y


def run_cdf_experiment(config):
    """``N`` realizations of the normalized sum and of its quasi-Gaussian version.

    For ``p = 1`` the signed sum is compared with ``N(0, var X)``; for
    ``p > 1`` the squared norm, divided by ``var X``, with chi-squared on ``p``
    degrees of freedom. Realizations come in blocks of 500 with one stream
    per block; in each block the ``X`` array is drawn before the ``Y`` array.
    """
    if config.kind != "cdf":
        raise ConfigError(f"run_cdf_experiment needs kind=cdf, got {config.kind}")
    y = _y_model(config)
    n, p = config.n, config.p
    var = config.x_dist.variance()
    starts = range(0, config.N, _CDF_BLOCK)

    def stat(A):
        S = A.sum(axis=1) / np.sqrt(n)
        return S[:, 0] if p == 1 else np.einsum("ij,ij->i", S, S) / var

    def task(start):
        m = min(_CDF_BLOCK, config.N - start)
        rng = make_stream(config.seed, "cdf", start // _CDF_BLOCK)
        X = np.asarray(config.x_dist.sample(rng, (m, n, p)), dtype=float)
        Y = np.asarray(y.sample(rng, (m, n, p)), dtype=float)
        return stat(X), stat(Y)

    parts = _map_ordered(task, starts, config.n_threads())
    sn = np.sort(np.concatenate([a for a, _ in parts]))
    syn = np.sort(np.concatenate([b for _, b in parts]))
    if p == 1:
        reference = f"normal(var={var!r})"
        ref = lambda t: normal_cdf(t, 0.0, var)  # noqa: E731
    else:
        reference = f"chisq(p={p})"
        ref = lambda t: chi_squared_cdf(p, np.maximum(t, 0.0))  # noqa: E731
    return CdfDataset(
        value_sn=sn,
        value_syn=syn,
        reference=reference,
        ks_sn_syn=ks_two_sample(sn, syn),
        ks_sn_ref=ks_to_reference(sn, ref),
        ks_syn_ref=ks_to_reference(syn, ref),
        meta={"n": n, "p": p, "x_dist": str(config.x_dist), "y_model": str(y), "seed": config.seed},
    )


def make_design(config):
    """The frozen design of a regression experiment."""
    if config.design == "fourier":
        return fourier_design(config.p, config.n)
    return gaussian_design(config.p, config.n, make_stream(config.seed, "design"))


def run_regression_coverage(config, force=False):
    """Wild-bootstrap coverage of ``T <= Q_T^b(alpha)`` with ``theta* = 0``."""
    if config.kind != "regression":
        raise ConfigError(f"run_regression_coverage needs kind=regression, got {config.kind}")
    _check_budget(config, force)
    try:
        design = make_design(config)
        model = RegressionModel(np.zeros(config.p), config.x_dist)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    def task(reps):
        h = np.zeros(len(config.alphas), dtype=np.int64)
        for r in reps:
            rng = make_stream(config.seed, "regression", r)
            h += regression_rep(design, model, config.scheme, config.B, config.alphas, rng, config.mode)
        return h

    hits = np.sum(_map_ordered(task, _chunks(config.R), config.n_threads()), axis=0)
    return CoverageTable.from_hits(
        "regression", config.n, config.p, config.x_dist, config.scheme, config.alphas, hits, config.R, config.B, config.seed
    )


def run_weights_check(config):
    """Exact moments and the validation flags of ``config.scheme``."""
    s = config.scheme
    report = validate_scheme(s)
    out = {"scheme": str(s), "var_z": float(s.var_z), "moments": list(s.moments())}
    out.update(report.as_dict())
    if isinstance(s, BernoulliMix):
        out["sigma_u"] = float(s.sigma_u)
    return out


def run_moment_fit(config):
    """Gaussian-plus-Pareto split of ``x_dist`` and the matched moments.

    Reports the largest Gaussian variance admitted by the order ``K``
    moments, the fixed-shape Pareto split, the Pareto law refitted from the
    split's residual moments, and the largest moment mismatch below ``K``.
    """
    x = config.x_dist
    K = config.K
    m = x.raw_moments(K)
    out = {"x_dist": str(x), "K": K, "max_gaussian_variance": max_gaussian_variance(m)}
    split = pareto_split(x)
    out["convolution_model"] = str(split)
    out["var_z"] = split.var_z
    mean = x.mean()
    c = affine_moments(x.raw_moments(3).values, mean, 1.0)
    u = deconvolve_moments(c, split.var_z).values
    refit = fit_shifted_pareto(u[2], u[3])
    out["pareto_refit"] = str(refit)
    out["shape"] = refit.a
    out["scale"] = refit.scale
    out["match_error"] = verify_match(x, split, K - 1)
    return out


def run(config, force=False):
    """Dispatch on ``config.kind``."""
    if config.kind == "coverage":
        return run_coverage(config, force)
    if config.kind == "cdf":
        return run_cdf_experiment(config)
    if config.kind == "regression":
        return run_regression_coverage(config, force)
    if config.kind == "weights-check":
        return run_weights_check(config)
    return run_moment_fit(config)


def with_overrides(config, **kw):
    """Copy of ``config`` with the non-``None`` keyword values replaced."""
    return replace(config, **{k: v for k, v in kw.items() if v is not None})
