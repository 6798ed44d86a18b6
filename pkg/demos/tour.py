"""A short walk through the library on small instances."""

import math

import numpy as np

import distortionlab as dl
from distortionlab import election as E
from distortionlab import generators as G
from distortionlab import metric as M
from distortionlab import rules as R
from distortionlab import worstcase as W

# voters and candidates on a line, ranked by distance
e = G.gen_random_euclidean(9, 4, dim=1, seed=7)
print("profile (best first):")
print(e.profile)
print("social costs:", np.round(E.social_costs(e), 3))

# parallel-universe STV can return several winners
for w in R.stv_winners(e):
    print(f"STV winner {e.candidates[w]}: distortion {E.realized_distortion(e, w):.3f}")

pm = R.plurality_matching_winner(e)
print(f"PluralityMatching winner {e.candidates[pm.winner]}, matching {pm.matching}")

# the worst metric consistent with the ballots alone
res = W.worst_case_distortion(e, pm.winner)
print(f"worst-case distortion of {e.candidates[pm.winner]} from ballots alone: {res.value:.3f}")

# split profile: distortion 3 on metrics, 7 on 2-approximate metrics
split = G.gen_split_profile(1)
for rho in (1.0, 2.0):
    print(f"split profile, rho={rho}: {W.worst_case_distortion(split, 1, rho).value:.3f}")

# doubling constants
print("uniform 5-point metric lambda:", M.doubling_constant(M.uniform_metric(5)).lam)
tree, witness = G.gen_stv_tree_lb(2)
print("tree instance: lambda", tree.meta["lambda"],
      "SC(w)/SC(x) =", E.social_cost(tree, tree.meta["w"]) / E.social_cost(tree, tree.meta["x"]))

# dynamics
coord = dl.coordination_dynamics(e)
print(f"coordination winner {e.candidates[coord.winner]}, "
      f"distortion {E.realized_distortion(e, coord.winner):.3f} (bound 11)")
print("harmonic H_8 =", round(G.harmonic(8), 4), "general bound", G.bound_value("GENERAL", m=8))
assert math.isfinite(res.value)
