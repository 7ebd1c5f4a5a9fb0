"""
Matching moments with atoms and Pareto residuals
================================================

Gauss rules recover a finite atomic law from its moments, and the
deconvolution step removes a Gaussian component before fitting a residual.
"""

# %%
# Atoms from moments
# ------------------

import numpy as np

from quasiboot.distributions import FiniteAtomic, Lognormal
from quasiboot.moment_match import (
    atomic_from_moments,
    deconvolve_moments,
    fit_shifted_pareto,
    max_gaussian_variance,
)

law = FiniteAtomic((-1.0, 0.5, 2.0), (0.3, 0.5, 0.2))
u = law.raw_moments(5)
mu = atomic_from_moments(u)
print("nodes", mu.nodes, "weights", mu.weights)
print("round trip error", np.max(np.abs(mu.moments(5) - u.values)))

# %%
# Two atoms only see three moments. The fourth differs.

partner = atomic_from_moments(law.raw_moments(3))
print("4th moment:", law.raw_moments(4).values[4], "vs", partner.moments(4)[4])

# %%
# Gaussian plus Pareto for the lognormal
# --------------------------------------

m = Lognormal(1.0, "std").raw_moments(4)
print("largest admissible Gaussian variance", max_gaussian_variance(m))
for var_z in (0.0, 0.02, 0.0458):
    r = deconvolve_moments(m, var_z).values
    fit = fit_shifted_pareto(r[2], r[3])
    print(f"var_z={var_z:<7} shape={fit.a:.4f} scale={fit.scale:.4f}")
