"""
Kernel matrices, the HSIC dependence statistic, a permutation independence
test and backward feature elimination by HSIC (BAHSIC).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial.distance import cdist, pdist

RBF = "rbf"
LINEAR = "linear"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family and lengthscale.

    ``lengthscale=None`` on an RBF kernel means "median heuristic", resolved
    against the data the first time a kernel matrix is built.
    """

    family: str = RBF
    lengthscale: float | None = None

    def __post_init__(self):
        if self.family not in (RBF, LINEAR):
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.family == RBF and self.lengthscale is not None and not self.lengthscale > 0:
            raise ValueError("RBF lengthscale must be positive")

    def resolve(self, X) -> "KernelSpec":
        if self.family == RBF and self.lengthscale is None:
            return replace(self, lengthscale=median_heuristic(X))
        return self

    def to_dict(self):
        return {"family": self.family, "lengthscale": self.lengthscale}

    @classmethod
    def from_dict(cls, d):
        return cls(d["family"], d.get("lengthscale"))


def _as_2d(X):
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return X


def median_heuristic(X) -> float:
    """Median pairwise Euclidean distance between rows (1.0 if degenerate)."""
    X = _as_2d(X)
    if X.shape[0] < 2:
        return 1.0
    d = np.median(pdist(X))
    return float(d) if d > 0 else 1.0


def kernel_matrix(X, spec: KernelSpec = KernelSpec(), Y=None) -> np.ndarray:
    """Gram matrix ``k(x_i, y_j)``; ``Y`` defaults to ``X``.

    The RBF kernel is ``exp(-|x - x'|^2 / (2 d^2))``.
    """
    X = _as_2d(X)
    if not np.all(np.isfinite(X)):
        raise ValueError("kernel input has non-finite entries")
    spec = spec.resolve(X)
    Yv = X if Y is None else _as_2d(Y)
    if spec.family == LINEAR:
        K = X @ Yv.T
    else:
        K = np.exp(-cdist(X, Yv, "sqeuclidean") / (2.0 * spec.lengthscale ** 2))
    if Y is None:
        K = 0.5 * (K + K.T)
    return K


def centering_matrix(n: int) -> np.ndarray:
    return np.eye(n) - np.full((n, n), 1.0 / n)


def double_center(K) -> np.ndarray:
    """``H K H`` without forming ``H``."""
    K = np.asarray(K, dtype=float)
    Kc = K - K.mean(axis=0, keepdims=True)
    return Kc - Kc.mean(axis=1, keepdims=True)


def hsic(K, G) -> float:
    """Biased empirical HSIC, ``Tr(K H G H) / n^2``."""
    K = np.asarray(K, dtype=float)
    G = np.asarray(G, dtype=float)
    if K.shape != G.shape or K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"kernel shapes differ: {K.shape} vs {G.shape}")
    n = K.shape[0]
    return float(np.sum(double_center(K) * G.T) / n ** 2)


@dataclass(frozen=True)
class HsicTestResult:
    statistic: float
    p_value: float
    n_permutations: int
    reject_at: float

    @property
    def reject(self) -> bool:
        return self.p_value <= self.reject_at


def hsic_test(X, Z, x_spec=KernelSpec(), z_spec=KernelSpec(), n_perm=500, seed=0,
              alpha=0.05) -> HsicTestResult:
    """Permutation test of independence between the rows of ``X`` and ``Z``.

    The p-value is ``(1 + #{permuted >= observed}) / (1 + n_perm)``.
    """
    X, Z = _as_2d(X), _as_2d(Z)
    n = X.shape[0]
    if Z.shape[0] != n:
        raise ValueError("X and Z must have the same number of rows")
    if n < 5:
        raise ValueError("hsic_test needs at least 5 samples")
    if n_perm < 99:
        raise ValueError("use at least 99 permutations")
    Kc = double_center(kernel_matrix(X, x_spec))
    G = kernel_matrix(Z, z_spec)
    stat = float(np.sum(Kc * G) / n ** 2)
    rng = np.random.default_rng(seed)
    exceed = 0
    for _ in range(n_perm):
        p = rng.permutation(n)
        if np.sum(Kc * G[np.ix_(p, p)]) / n ** 2 >= stat:
            exceed += 1
    return HsicTestResult(stat, (1 + exceed) / (1 + n_perm), n_perm, alpha)


def comparison_kernel(C, lengthscale=None) -> np.ndarray:
    """RBF kernel between rows of the comparison matrix (median heuristic by default)."""
    return kernel_matrix(np.asarray(C, dtype=float), KernelSpec(RBF, lengthscale))


def standardize(X) -> np.ndarray:
    X = _as_2d(X)
    sd = X.std(axis=0)
    sd[sd == 0] = 1.0
    return (X - X.mean(axis=0)) / sd


@dataclass
class BahsicResult:
    selected: list
    trace: list = field(default_factory=list)


def bahsic_select(Phi, C_repr, target_k, spec=KernelSpec(), drop_fraction=0.1,
                  max_subsets=2000) -> BahsicResult:
    """Backward elimination of features by HSIC against a comparison kernel.

    At each step ``ceil(drop_fraction * remaining)`` features (at least one,
    never going below ``target_k``) are removed, choosing the set whose
    removal leaves the largest HSIC between the kernel on the remaining
    (standardised) features and ``C_repr``. The set is found exhaustively
    when there are at most ``max_subsets`` candidates, otherwise one feature
    at a time.

    Returns the retained column indices in original order together with the
    elimination trace, a list of ``(removed, hsic_after)`` tuples.
    """
    X = Phi.Phi if hasattr(Phi, "Phi") else _as_2d(Phi)
    p = X.shape[1]
    if not 1 <= target_k <= p:
        raise ValueError(f"target_k must be in [1, {p}], got {target_k}")
    if not 0 < drop_fraction <= 1:
        raise ValueError("drop_fraction must be in (0, 1]")
    X = standardize(X)
    G = np.asarray(C_repr, dtype=float)
    Gc = double_center(G)
    n = X.shape[0]

    def score(cols):
        K = kernel_matrix(X[:, list(cols)], spec)
        return float(np.sum(K * Gc) / n ** 2)

    remaining = list(range(p))
    trace = []
    while len(remaining) > target_k:
        m = min(max(1, math.ceil(drop_fraction * len(remaining))), len(remaining) - target_k)
        keep_size = len(remaining) - m
        if math.comb(len(remaining), m) <= max_subsets:
            best = max(itertools.combinations(remaining, keep_size), key=score)
            removed = [k for k in remaining if k not in best]
            remaining = list(best)
        else:
            removed = []
            for _ in range(m):
                drop = max(remaining, key=lambda k: score([c for c in remaining if c != k]))
                remaining.remove(drop)
                removed.append(drop)
        trace.append((removed, score(remaining)))
    return BahsicResult(sorted(remaining), trace)
