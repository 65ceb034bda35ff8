"""
Which covariates explain the match outcomes?
============================================

Test whether the covariates depend on the comparison pattern at all, then
keep the most informative ones by backward elimination.
"""

import numpy as np

from covrank import hsic_test
from covrank.core import ORDINAL
from covrank.kernels import bahsic_select, comparison_kernel
from covrank.synth import SynthConfig, sample_graph

rng = np.random.default_rng(1)
n = 100
X = rng.standard_normal((n, 8))
r = X[:, 0] + X[:, 3] - X[:, 5]
graph, _ = sample_graph(r, SynthConfig(n=n, sparsity=0.3, kind=ORDINAL), rng)

###############################################################################
# Permutation tests of each covariate against the rows of C.
for k in range(X.shape[1]):
    res = hsic_test(X[:, k], graph.C, seed=k)
    print(f"x{k}: HSIC={res.statistic:.5f}  p={res.p_value:.3f}")

###############################################################################
# Backward elimination down to three covariates.
sel = bahsic_select(X, comparison_kernel(graph.C), target_k=3)
print("selected:", sel.selected)
for removed, score in sel.trace:
    print(f"  removed {removed} -> HSIC {score:.5f}")
