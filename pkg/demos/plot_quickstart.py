"""
Ranking players from a handful of matches
=========================================

Simulate a league of players whose skill is a wiggly function of one
covariate, observe a sparse set of score differences, and compare the
rankers that use only the matches with those that also use the covariate.
"""

import numpy as np

from covrank import SynthConfig, generate, kendall_tau
from covrank.harness import CvPlan, cross_validate, fit

###############################################################################
# 200 players, 5% of all pairs observed, a fifth of the observed scores
# replaced by uniform noise.
cfg = SynthConfig(n=200, sparsity=0.05, noise="ero", noise_level=0.2, seed=0)
data = generate(cfg)
print(f"{data.graph.n_observed()} matches, {data.repair_edges} added to connect the graph")

###############################################################################
# Matches only.
for algo in ("serial", "svd", "svdn", "rc"):
    res, _ = fit(algo, data.graph)
    print(f"{algo:7s} tau={kendall_tau(res.scores, data.r_true):.3f}  "
          f"upsets={res.upset_fraction:.1%}")

###############################################################################
# Matches plus the covariate. The kernel rankers get their lengthscale (and
# lambda or epsilon) from 10-fold cross-validation on held-out matches.
for algo in ("cserial", "svdc", "svdk", "kcca"):
    params = {}
    if algo != "svdc":
        params = cross_validate(data.graph, data.features, algo, CvPlan(seed=1)).best
    res, _ = fit(algo, data.graph, data.features, **params)
    print(f"{algo:7s} tau={kendall_tau(res.scores, data.r_true):.3f}  "
          f"upsets={res.upset_fraction:.1%}  {params}")

###############################################################################
# The best ten players by the kernel ranker.
res, _ = fit("svdk", data.graph, data.features)
print("top ten:", res.ordering[:10])
print("true top ten:", np.argsort(-data.r_true)[:10])
