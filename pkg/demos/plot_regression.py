"""
Wild bootstrap for least squares
================================

A confidence ball for the full coefficient vector of a linear model with
skewed errors, calibrated by multiplier bootstrap on the whitened scores.
"""

# %%

import numpy as np

from quasiboot.distributions import ChiSquare1
from quasiboot.regression import RegressionModel, gaussian_design, regression_coverage
from quasiboot.rng import make_stream
from quasiboot.weights import BernoulliMix, PureGaussian

design = gaussian_design(4, 120, make_stream(5, "design"))
model = RegressionModel(np.zeros(4), ChiSquare1())
alphas = [0.05, 0.1, 0.2]

# %%
# Oracle errors versus fitted residuals
# -------------------------------------

for scheme in (PureGaussian(), BernoulliMix(0.276)):
    for mode in ("oracle", "residuals"):
        tab = regression_coverage(design, model, scheme, 400, alphas, 400, make_stream(5, "reps"), mode=mode)
        print(f"{str(scheme):18s} {mode:9s}", np.round(tab.frequencies(), 3))
