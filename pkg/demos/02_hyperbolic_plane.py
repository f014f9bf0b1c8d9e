# %% [markdown]
# # The hyperbolic plane
#
# In the upper half-plane the quantity N(z, w) = |z - w| + |z - conj(w)|
# satisfies Ptolemy's inequality, which is strong hyperbolicity with
# parameter 1. We sample quadruples and look at the worst slack.

# %%
import math

from stronghyp import h2

q = h2.sample_h2_quadruples((-10, 10, 0, 10), 100_000, seed=0)
print("min margin:", h2.margins(q).min())
print("max four-point defect:", h2.h2_delta_defect(q[:, 0], q[:, 1], q[:, 2], q[:, 3]).max())

# %% [markdown]
# The optimal delta is log 2. Three boundary points a, 0, -a seen from i give
# the defect log(2 / sqrt(a^2 + 1)), which tends to log 2 as a shrinks. Interior
# approximants at small heights reproduce the same numbers.

# %%
for a, d in h2.optimal_delta_experiment([1, 0.1, 0.01, 1e-3]):
    print(f"a={a:<6g} defect={d:.8f}  interior={h2.interior_defect(a, 1e-7):.8f}  log2={math.log(2):.8f}")

# %%
lim = h2.boundary_product_limit(0.5, 2.0)
print("boundary product limit:", lim.values, "exact", lim.exact, "monotone", lim.monotone)
