"""Weighted bootstrap for norm statistics with moment-matched weights and
quasi-Gaussian approximations.

Submodules
----------
distributions
    Sampling laws, exact raw moments and their text forms.
weights
    Bootstrap multiplier schemes with third moment one.
bootstrap
    Scaled sums, replicates and empirical upper quantiles.
moment_match
    Gaussian-plus-residual moment splits, Hankel checks, Gauss rules.
regression
    Linear model and wild bootstrap.
analysis
    Empirical c.d.f.s, KS distances, chi-squared c.d.f., shell probabilities.
harness
    Monte Carlo experiments driven by flat config files.
"""
from .analysis import (
    EmpiricalCdf,
    anti_concentration_sup,
    chi_squared_cdf,
    gaussian_shell_prob,
    ks_to_reference,
    ks_two_sample,
)
from .bootstrap import (
    QuantileEstimate,
    bootstrap_quantile,
    bootstrap_replicate_norm,
    empirical_upper_quantile,
    scaled_sum,
)
from .distributions import (
    ChiSquare1,
    FiniteAtomic,
    Gaussian,
    GaussianConvolution,
    Lognormal,
    MomentNotFinite,
    MomentVector,
    ShiftedScaledPareto,
    parse_spec,
    raw_moments,
    sample_scalar,
    sample_vector,
    standardize,
)
from .harness import (
    BudgetExceeded,
    ConfigError,
    ExperimentConfig,
    emit,
    load_config,
    parse_config,
    run_cdf_experiment,
    run_coverage,
    run_regression_coverage,
)
from .moment_match import (
    AtomicMeasure,
    ConvolutionModel,
    atomic_from_moments,
    deconvolve_moments,
    exact_poly_expectation,
    fit_shifted_pareto,
    hankel_solvable,
    max_gaussian_variance,
    pareto_split,
    verify_match,
)
from .rng import make_stream
from .tables import CdfDataset, CoverageTable
from .weights import (
    BernoulliMix,
    ChiSqMix,
    Custom,
    ExpMix,
    PureGaussian,
    draw_weights,
    parse_scheme,
    solve_bernoulli_mix,
    two_point_surrogate,
    validate_scheme,
)

__version__ = "0.1.0"
