"""Deterministic facts the library leans on, checked numerically.

Reduced sizes of the ``rmtlab verify`` suites, plus a look inside the
restricted invertibility and interlacing-chain checks.
"""
# %%
import numpy as np

from rmtlab.experiments import interlace_gap_chain_check
from rmtlab.spectral import restricted_bound_rhs, restricted_column_select
from rmtlab.verify import SUITES

# %%
small = {"cosine": {"grid_size": 20_000}, "containment": {"pairs": 2000}, "interlacing": {"count": 1000},
         "paley-zygmund": {}, "torus": {"count": 20_000}, "spread": {"count": 2000},
         "decoupling": {"instances": 6, "trials": 5000}, "restricted": {"instances": 50}}
for name, kw in small.items():
    rep = SUITES[name](**kw)
    print(f"{name:>14s}: {rep['failures']} failures in {rep['cases']} cases")

# %% [markdown]
# Restricted invertibility: pick l columns of a k×d matrix whose smallest
# singular value is as large as possible, and compare with the bound.

# %%
W = np.random.default_rng(5).standard_normal((4, 8))
for l in (1, 2, 3):
    sel = restricted_column_select(W, l, mode="exhaustive")
    print(f"l={l}: columns {sel.indices}, s_l = {sel.achieved_sl:.3f}, "
          f"1/s_l over bound = {sel.ratio:.3f} (bound {restricted_bound_rhs(W, l):.3f})")

# %% [markdown]
# From a small eigenvalue gap to a small projection: each step of the chain
# is re-checked on sampled matrices, and samples that miss a hypothesis are
# skipped rather than counted.

# %%
rep = interlace_gap_chain_check(20, 2, trials=500, eps=3.0, seed=0)
print({k: rep[k] for k in ("tested", "hypothesis_skip", "identity_fail", "interlace_fail", "conclusion_fail")})
