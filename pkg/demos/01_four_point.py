# %% [markdown]
# # Four-point quantities on small spaces
#
# A 4-cycle with unit edges is the smallest space with a nonzero four-point
# gap. Its delta is 1 and the largest strong-hyperbolicity parameter is log 2,
# so the bound delta <= log 2 / eps* is attained with equality.

# %%
import math

from stronghyp import FiniteMetricSpace, analyze, eps_star, is_ptolemaic_visual, is_strongly_hyperbolic

c4 = FiniteMetricSpace([[0, 1, 2, 1], [1, 0, 1, 2], [2, 1, 0, 1], [1, 2, 1, 0]], labels="abcd")
report = analyze(c4)
print(report.to_json())
print("log 2 / eps* =", math.log(2) / report.eps_star)

# %% [markdown]
# Above the critical parameter both the strong inequality and the Ptolemy
# inequality of the visual quasi-metric fail, at every basepoint.

# %%
e = eps_star(c4).value
for eps in (0.5 * e, e, 2 * e):
    sh = is_strongly_hyperbolic(c4, eps)[0]
    pt = [is_ptolemaic_visual(c4, eps, o) for o in range(4)]
    print(f"eps={eps:.4f}  strongly hyperbolic={sh}  Ptolemaic at each basepoint={pt}")

# %% [markdown]
# A tree metric imposes no constraint at all: eps* is infinite.

# %%
from stronghyp.spaces import parse_edge_list

tree = parse_edge_list("r,a,1\nr,b,2\nr,c,0.5\nc,d,3\n")
print(analyze(tree).to_json()["eps_star"])
