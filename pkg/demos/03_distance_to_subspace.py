"""Distance from a random vector to the span of n − k random columns.

The orthogonal complement has dimension k, so for gaussian a the distance is
exactly χ_k.  For other subgaussian laws the small-ball tail should still
decay like ε^k.
"""
# %%
import numpy as np

from rmtlab.config import ExperimentConfig
from rmtlab.experiments import chi_oracle, fit_exponent, run_tail_experiment

n = 48
grids = {1: (0.01, 0.5, 1.25), 2: (0.03, 0.5, 1.2), 4: (0.08, 0.5, 1.12)}

# %%
for k, (lo, hi, ratio) in grids.items():
    cfg = ExperimentConfig("distance", seed=k, n=n, k=k, trials=600, vector_per_matrix=50,
                           ensemble_dist="rademacher", vector_dist="rademacher",
                           grid_lo=lo, grid_hi=hi, grid_ratio=ratio)
    fit = fit_exponent(run_tail_experiment(cfg))
    print(f"k={k}: sign vectors, slope {fit.slope:.2f} ± {fit.slope_ci:.2f} (scaling ε^{k})")

# %% [markdown]
# Gaussian control.  Each grid point uses its own block of samples so the
# Wilson intervals are independent and the coverage count is meaningful.

# %%
k = 2
eps = np.geomspace(0.05, 1.0, 30)
ctrl = ExperimentConfig("distance", seed=99, n=n, k=k, trials=600, vector_per_matrix=50,
                        grid_points=tuple(eps))
curve = run_tail_experiment(ctrl, pointwise=True)
ref = chi_oracle(curve, k)
inside = (curve.ci_lo <= ref) & (ref <= curve.ci_hi)
print(f"χ_{k} law inside the 95% interval at {inside.sum()}/{inside.size} grid points")
