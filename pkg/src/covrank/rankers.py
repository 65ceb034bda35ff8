"""
Spectral ranking algorithms.

All rankers take a :class:`~covrank.core.ComparisonGraph` and return an
oriented :class:`~covrank.core.RankResult`. Rankers that tie the scores to
item covariates also return a :class:`FittedModel` usable for prediction on
unseen items.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from . import numlin
from .core import (CARDINAL, ComparisonGraph, DataError, FeatureTable, RankResult,
                   as_features, degree_normalize, orient_ranking, similarity_matrix,
                   validate_alignment)
from .kernels import LINEAR, KernelSpec, comparison_kernel, double_center, kernel_matrix

LINEAR_MODEL = "linear"
KERNEL_MODEL = "kernel"


@dataclass(frozen=True)
class FittedModel:
    """Coefficients for scoring items from their covariates.

    Linear models score ``(phi - feature_mean) @ beta``. Kernel models score
    ``(k(phi, train_features) - kernel_col_means) @ alpha``. Coefficients are
    stored already oriented, so larger predicted scores are better.
    """

    algo: str
    kind: str
    beta: np.ndarray | None = None
    feature_mean: np.ndarray | None = None
    alpha: np.ndarray | None = None
    train_features: np.ndarray | None = None
    kernel: KernelSpec | None = None
    kernel_col_means: np.ndarray | None = None
    gamma: np.ndarray | None = None
    lam: float | None = None
    feature_columns: tuple = ()
    train_scores: np.ndarray | None = None
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind == LINEAR_MODEL:
            if self.beta is None or self.alpha is not None:
                raise ValueError("a linear model needs beta and no alpha")
        elif self.kind == KERNEL_MODEL:
            if self.alpha is None or self.train_features is None:
                raise ValueError("a kernel model needs alpha and the training features")
        else:
            raise ValueError(f"unknown model kind {self.kind!r}")

    def to_dict(self):
        def arr(a):
            return None if a is None else np.asarray(a).tolist()

        return {
            "algo": self.algo,
            "kind": self.kind,
            "beta": arr(self.beta),
            "feature_mean": arr(self.feature_mean),
            "alpha": arr(self.alpha),
            "train_features": arr(self.train_features),
            "kernel": None if self.kernel is None else self.kernel.to_dict(),
            "kernel_col_means": arr(self.kernel_col_means),
            "gamma": arr(self.gamma),
            "lambda": self.lam,
            "feature_columns": list(self.feature_columns),
            "train_scores": arr(self.train_scores),
            "extras": self.extras,
        }

    @classmethod
    def from_dict(cls, d):
        def arr(key):
            v = d.get(key)
            return None if v is None else np.asarray(v, dtype=float)

        return cls(
            algo=d["algo"],
            kind=d["kind"],
            beta=arr("beta"),
            feature_mean=arr("feature_mean"),
            alpha=arr("alpha"),
            train_features=arr("train_features"),
            kernel=None if d.get("kernel") is None else KernelSpec.from_dict(d["kernel"]),
            kernel_col_means=arr("kernel_col_means"),
            gamma=arr("gamma"),
            lam=d.get("lambda"),
            feature_columns=tuple(d.get("feature_columns", ())),
            train_scores=arr("train_scores"),
            extras=d.get("extras", {}),
        )


@dataclass(frozen=True)
class FairnessConfig:
    """HSIC fairness penalty weight and the kernel on the sensitive columns.

    The linear default penalises covariance between scores and the
    sensitive features.
    """

    lam: float = 0.0
    sensitive_kernel: KernelSpec = KernelSpec(LINEAR)

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError("fairness lambda must be non-negative")


def _degenerate(g: ComparisonGraph, algo: str) -> RankResult | None:
    if np.any(g.C):
        return None
    return orient_ranking(g, np.zeros(g.n),
                          {"algo": algo, "warning": "no comparisons observed; index ordering"})


def _ordinal(g: ComparisonGraph) -> ComparisonGraph:
    return g.signed() if g.kind == CARDINAL else g


def _predictors(g, features):
    features = as_features(features)
    validate_alignment(g, features)
    X = features.predictive()
    if X.shape[1] == 0:
        raise DataError("no predictive (non-sensitive) feature columns")
    return features, X


def serial_rank(g: ComparisonGraph) -> RankResult:
    """Seriation ranking from the Fiedler vector of the agreement-similarity Laplacian."""
    if g.n < 3:
        raise DataError("serial_rank needs at least three items")
    deg = _degenerate(g, "serial")
    if deg is not None:
        return deg
    S = similarity_matrix(_ordinal(g))
    r = numlin.fiedler_vector(numlin.laplacian(S))
    return orient_ranking(g, r, {"algo": "serial"})


def c_serial_rank(g: ComparisonGraph, features, spec: KernelSpec = KernelSpec(),
                  lam: float = 1.0) -> RankResult:
    """Seriation on ``S + lam K`` where ``K`` is a kernel on the item covariates."""
    if g.n < 3:
        raise DataError("c_serial_rank needs at least three items")
    if not (np.isfinite(lam) and lam >= 0):
        raise ValueError("lambda must be finite and non-negative")
    _, X = _predictors(g, features)
    spec = spec.resolve(X)
    if lam == 0:
        res = serial_rank(g)
        res.diagnostics.update(algo="cserial", lam=0.0, lengthscale=spec.lengthscale)
        return res
    S = similarity_matrix(_ordinal(g)) + lam * kernel_matrix(X, spec)
    r = numlin.fiedler_vector(numlin.laplacian(S))
    return orient_ranking(g, r, {"algo": "cserial", "lam": lam,
                                 "lengthscale": spec.lengthscale})


def svd_rank(g: ComparisonGraph, normalized: bool = False) -> RankResult:
    """Ranking from the top two eigenvectors of ``M M^T`` restricted to ``1``-perp.

    ``M`` is ``C`` or, with ``normalized=True``, ``D^{-1} C``. Of the four
    candidates (two vectors, two signs) the one with fewest upsets is kept.
    """
    algo = "svdn" if normalized else "svd"
    deg = _degenerate(g, algo)
    if deg is not None:
        return deg
    if g.n < 3:
        raise DataError("svd_rank needs at least three items")
    M = degree_normalize(g) if normalized else g.C
    w, V = numlin.restricted_eig(M @ M.T)
    best = None
    for k in (1, 2):
        res = orient_ranking(g, V[:, -k], {"algo": algo, "vector": k, "eigenvalue": float(w[-k])})
        if best is None or res.upsets < best.upsets:
            best = res
    return best


def svdcov_rank(g: ComparisonGraph, features):
    """Linear-covariate SVD ranking, ``r = H Phi beta``.

    Returns
    -------
    RankResult, FittedModel
    """
    features, X = _predictors(g, features)
    mu = X.mean(axis=0)
    W = X - mu
    L, delta = numlin.cholesky_jitter(W.T @ W)
    B = W.T @ g.C
    gamma, beta, val = _cov_top(L, B)
    r = W @ beta
    res = orient_ranking(g, r, {"algo": "svdc", "jitter": delta, "eigenvalue": val})
    sign = -1.0 if res.orientation == "reversed" else 1.0
    model = FittedModel("svdc", LINEAR_MODEL, beta=sign * beta, feature_mean=mu, gamma=gamma,
                        feature_columns=features.predictive_columns,
                        train_scores=res.scores)
    return res, model


def _cov_top(L, B):
    # Psi = L^{-1} B B^T L^{-T} with B = Phi^T H C
    A = numlin.whiten(L, B)
    top = numlin.top_eigenpair(A @ A.T)
    return top.vector, numlin.unwhiten(L, top.vector), top.value


def _kernel_fit(g, X, spec, Xi_extra=None):
    """Shared core of SVDKCov / SVDKFair: returns ``(r, alpha, gamma, K, delta, value)``."""
    K = kernel_matrix(X, spec)
    KH = K - K.mean(axis=1, keepdims=True)      # K H
    HK = KH.T                                   # H K
    KHK = KH @ K
    # K H K annihilates the ones vector
    L, delta = numlin.cholesky_jitter(0.5 * (KHK + KHK.T), singular=True)
    A = numlin.whiten(L, KH)                    # L^{-1} K H
    B = A @ g.C
    Psi = B @ B.T
    if Xi_extra is not None:
        Psi = Psi - A @ Xi_extra @ A.T
    top = numlin.top_eigenpair(0.5 * (Psi + Psi.T))
    alpha = numlin.unwhiten(L, top.vector)
    return HK @ alpha, alpha, top.vector, K, delta, top.value


def _kernel_model(algo, X, spec, K, alpha, gamma, res, columns, lam=None):
    sign = -1.0 if res.orientation == "reversed" else 1.0
    return FittedModel(algo, KERNEL_MODEL, alpha=sign * alpha, train_features=X, kernel=spec,
                       kernel_col_means=K.mean(axis=0), gamma=gamma, lam=lam,
                       feature_columns=columns, train_scores=res.scores)


def svdkcov_rank(g: ComparisonGraph, features, spec: KernelSpec = KernelSpec()):
    """Kernelised covariate SVD ranking, ``r = H K alpha``.

    Returns
    -------
    RankResult, FittedModel
    """
    features, X = _predictors(g, features)
    spec = spec.resolve(X)
    r, alpha, gamma, K, delta, val = _kernel_fit(g, X, spec)
    if np.allclose(double_center(K), 0.0, atol=1e-12):
        raise numlin.NumericalError("centred kernel matrix vanishes; features carry no information")
    res = orient_ranking(g, r, {"algo": "svdk", "jitter": delta, "eigenvalue": val,
                                "lengthscale": spec.lengthscale})
    return res, _kernel_model("svdk", X, spec, K, alpha, gamma, res, features.predictive_columns)


def svdkfair_rank(g: ComparisonGraph, features: FeatureTable, spec: KernelSpec = KernelSpec(),
                  fair: FairnessConfig = FairnessConfig()):
    """SVDKCov ranking with an HSIC penalty against the sensitive columns.

    The comparison term ``C C^T`` is replaced by ``C C^T - (lam / n^2) G`` where
    ``G`` is a kernel on the sensitive features. The covariate kernel uses
    the non-sensitive columns only.
    """
    features = as_features(features)
    if not features.sensitive_columns:
        raise DataError("svdkfair_rank needs at least one sensitive column")
    features, X = _predictors(g, features)
    spec = spec.resolve(X)
    n = g.n
    extra = None
    if fair.lam > 0:
        Gs = kernel_matrix(features.sensitive(), fair.sensitive_kernel)
        extra = (fair.lam / n ** 2) * Gs
    r, alpha, gamma, K, delta, val = _kernel_fit(g, X, spec, extra)
    if np.allclose(double_center(K), 0.0, atol=1e-12):
        raise numlin.NumericalError("centred kernel matrix vanishes; features carry no information")
    res = orient_ranking(g, r, {"algo": "svdkfair", "jitter": delta, "eigenvalue": val,
                                "lam": fair.lam, "lengthscale": spec.lengthscale})
    model = _kernel_model("svdkfair", X, spec, K, alpha, gamma, res,
                          features.predictive_columns, lam=fair.lam)
    return res, model


def kcca_from_kernels(K, G, epsilon, g: ComparisonGraph):
    """Regularised kernel CCA between two views, used as a ranker.

    Solves the generalised problem ``[[0, Kt Gt / n], [Gt Kt / n, 0]] x =
    lambda diag(K*, G*) x`` with ``Kt = H K H``, ``K* = Kt (Kt + eps I) / n``
    (likewise for ``G``), then forms ``r1 = K H alpha`` and ``r2 = G H beta``
    and keeps whichever has fewer upsets.

    Returns
    -------
    result : RankResult
    alpha, beta : ndarray
        Dual coefficients of the two views (unoriented).
    r1_result : RankResult
        The covariate-side ranking, oriented on its own.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    K = np.asarray(K, dtype=float)
    G = np.asarray(G, dtype=float)
    n = K.shape[0]
    if K.shape != (n, n) or G.shape != (n, n) or g.n != n:
        raise DataError("kernel sizes do not match the comparison graph")
    Kt, Gt = double_center(K), double_center(G)
    eye = np.eye(n)
    Ks = Kt @ (Kt + epsilon * eye) / n
    Gs = Gt @ (Gt + epsilon * eye) / n
    KG = Kt @ Gt / n
    A = np.block([[np.zeros((n, n)), KG], [KG.T, np.zeros((n, n))]])
    Bm = np.block([[Ks, np.zeros((n, n))], [np.zeros((n, n)), Gs]])
    # both centred blocks annihilate the ones vector
    pair = numlin.generalized_top_eig(A, 0.5 * (Bm + Bm.T), singular=True)
    alpha, beta = pair.vector[:n], pair.vector[n:]
    alpha_c = alpha - alpha.mean()
    beta_c = beta - beta.mean()
    diag = {"algo": "kcca", "correlation": pair.value, "jitter": pair.jitter,
            "epsilon": epsilon}
    r1 = orient_ranking(g, K @ alpha_c, {**diag, "side": "features"})
    r2 = orient_ranking(g, G @ beta_c, {**diag, "side": "comparisons"})
    best = r1 if r1.upsets <= r2.upsets else r2
    return best, alpha_c, beta_c, r1


def kcca_rank(g: ComparisonGraph, features, spec: KernelSpec = KernelSpec(), epsilon=None,
              G=None):
    """KCCA ranking between an item-covariate kernel and a kernel on the rows of ``C``.

    ``epsilon`` defaults to ``0.1 n``; ``G`` defaults to an RBF kernel on the
    comparison rows with median-heuristic lengthscale.

    Returns
    -------
    RankResult, FittedModel
        The model holds the covariate-side expansion, the only side usable
        for unseen items.
    """
    features, X = _predictors(g, features)
    spec = spec.resolve(X)
    n = g.n
    if epsilon is None:
        epsilon = 0.1 * n
    K = kernel_matrix(X, spec)
    if G is None:
        G = comparison_kernel(g.C)
    res, alpha_c, beta_c, r1 = kcca_from_kernels(K, G, epsilon, g)
    res.diagnostics["lengthscale"] = spec.lengthscale
    sign = -1.0 if r1.orientation == "reversed" else 1.0
    model = FittedModel("kcca", KERNEL_MODEL, alpha=sign * alpha_c, train_features=X,
                        kernel=spec, kernel_col_means=np.zeros(n), gamma=sign * beta_c,
                        feature_columns=features.predictive_columns, train_scores=r1.scores,
                        extras={"epsilon": epsilon,
                                "correlation": res.diagnostics["correlation"],
                                "side": res.diagnostics["side"]})
    return res, model


def probability_proxy(g: ComparisonGraph, S=None) -> np.ndarray:
    """Win-probability proxy built from a similarity matrix.

    ``P[i, j] = 1 - S[i, j] / 2n`` if ``i`` beat ``j``, ``S[i, j] / 2n`` if ``j``
    beat ``i`` and ``1/2`` otherwise.
    """
    if S is None:
        S = similarity_matrix(_ordinal(g))
    S = np.asarray(S, dtype=float)
    n = g.n
    if np.any(S > n):
        raise DataError("similarity entries must not exceed n")
    s = np.sign(g.C)
    return np.where(s > 0, 1.0 - S / (2 * n), np.where(s < 0, S / (2 * n), 0.5))


def rank_centrality(P, g: ComparisonGraph, tol=1e-12, max_iter=1_000_000) -> RankResult:
    """Stationary distribution of the random walk that moves towards winners.

    ``M[i, j] = P[j, i] / d_max`` on observed pairs, self-loops take the rest.
    """
    P = np.asarray(P, dtype=float)
    n = g.n
    if P.shape != (n, n):
        raise DataError("probability matrix does not match the graph")
    obs = g.observed
    if n > 1:
        ncomp, _ = connected_components(sparse.csr_matrix(obs), directed=False)
        if ncomp > 1:
            raise DataError(f"comparison graph has {ncomp} components; rank centrality "
                            "needs a connected graph (use a covariate-based ranker)")
    dmax = g.degrees().max(initial=0)
    if dmax == 0:
        return orient_ranking(g, np.full(n, 1.0 / max(n, 1)),
                              {"algo": "rc", "warning": "no comparisons observed; index ordering"})
    M = np.where(obs, P.T, 0.0) / dmax
    np.fill_diagonal(M, 0.0)
    np.fill_diagonal(M, 1.0 - M.sum(axis=1))
    MT = sparse.csr_matrix(M.T)
    pi = np.full(n, 1.0 / n)
    for it in range(max_iter):
        nxt = MT @ pi
        nxt /= nxt.sum()
        if np.abs(nxt - pi).sum() < tol:
            pi = nxt
            break
        pi = nxt
    else:
        raise numlin.ConvergenceError("rank centrality walk did not converge",
                                      float(np.abs(MT @ pi - pi).sum()))
    # snap rounding noise so that symmetric chains give exact ties
    scores = np.round(pi * n, 10)
    return orient_ranking(g, scores, {"algo": "rc", "iterations": it + 1})


def rc_rank(g: ComparisonGraph) -> RankResult:
    """Rank centrality on the similarity-based probability proxy."""
    return rank_centrality(probability_proxy(g), g)
