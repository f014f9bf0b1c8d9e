# %% [markdown]
# # Harmonic and Hausdorff measures on the boundary of F_2
#
# The exit distribution of the walk on cylinders [w] equals the normalized
# Hausdorff measure of the Green visual metric. For the simple walk every
# depth-2 cylinder has mass 1/12.

# %%
from stronghyp import boundary
from stronghyp.boundary import Cylinder, Ray, VisualParams
from stronghyp.freegroup import WalkMeasure, nonuniform_f2

srw = WalkMeasure.simple(2)
rep = boundary.measures_equal_report(srw, VisualParams.green(srw), 2, n_walks=100_000, seed=0)
print(rep.to_csv())

# %% [markdown]
# The non-uniform walk gives unequal masses, still matched by the Hausdorff
# measure of its own Green metric.

# %%
mu = nonuniform_f2()
params = VisualParams.green(mu)
print(boundary.measures_equal_report(mu, params, 1).to_csv())

# %% [markdown]
# Group elements act conformally: distances between translated rays scale by
# exp of the Busemann cocycle, and the Radon-Nikodym derivative of g_* nu is
# that same cocycle. One refinement of the cylinder already makes the
# piecewise integral exact.

# %%
print(boundary.conformality_check(params, "ab", Ray.parse("(a)"), Ray.parse("b'(ab)")))
for depth in (1, 2, 3):
    print(boundary.radon_nikodym_check(mu, "ab", Cylinder.parse("b'"), depth, params))
