# %% [markdown]
# # Green functions of random walks on F_2
#
# For the simple random walk F(e, s) = 1/3 and G(e, e) = 3/2. The killed
# Green function on a ball of radius 14 reproduces both, and Monte Carlo agrees.

# %%
import math

from stronghyp import green
from stronghyp.freegroup import WalkMeasure, nonuniform_f2
from stronghyp.walks import hitting_probability_mc

srw = WalkMeasure.simple(2)
t = green.green_function_truncated(srw, 14)
print("G(e,e) =", t.G_ee, " F(e,a) =", t.F("a"), " CG iterations:", t.iterations)
print("MC:", hitting_probability_mc(srw, "e", "a", 200_000, seed=0))

# %% [markdown]
# The Green distance -log F(e, w) grows like |w| log 3 for this walk.

# %%
for w in ("a", "ab", "ab'a", "abab"):
    print(w, t.green_length()[t.index(w)], len(w) * math.log(3))

# %% [markdown]
# For any nearest-neighbour walk the Green metric is a tree metric, so a Green
# ball has delta 0 and an infinite critical parameter. A walk with two-letter
# steps breaks the tree structure and gives a finite eps*.

# %%
mu = nonuniform_f2()
print(green.eb_check_green(green.green_metric_ball(mu, 3)).to_json())

range2 = WalkMeasure(2, {"a": .2, "a'": .2, "b": .1, "b'": .1, "ab": .1, "b'a'": .1, "ab'": .1, "ba'": .1})
print(green.eb_check_green(green.green_metric_ball(range2, 2)).to_json())

# %% [markdown]
# Ancona's cross ratio G(x,y)G(z,t) / (G(x,t)G(z,y)) is exactly 1 for
# nearest-neighbour walks. Walks with a little symmetry, like the one above,
# can keep it at 1 too. A generic two-letter walk shows the expected decay
# with the separation R of the two geodesics.

# %%
generic = WalkMeasure(2, {"a": .12, "a'": .12, "b": .08, "b'": .08, "aa": .08, "a'a'": .08, "ab": .06,
                          "b'a'": .06, "ab'": .05, "ba'": .05, "a'b": .04, "b'a": .04, "a'b'": .03, "ba": .03,
                          "bb": .04, "b'b'": .04})
tab = green.green_function_truncated(generic, 12)
for R in range(1, 6):
    scan = green.ancona_ratio_scan(tab, green.separated_quadruples(2, R, 200, seed=R, max_arm=1))
    print(R, scan.medians[R])
