"""
Data model for pairwise comparisons, item covariates and rankings.

The comparison matrix ``C`` is antisymmetric: ``C[i, j] > 0`` means item ``i``
beat item ``j`` (ordinal data, entries in {-1, 0, 1}) or ``C[i, j] = r_i - r_j``
(cardinal data). Unobserved pairs and draws are both stored as exact zeros.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ORDINAL = "ordinal"
CARDINAL = "cardinal"


class DataError(ValueError):
    """Raised on malformed comparison or feature data."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ComparisonGraph:
    """Antisymmetric matrix of pairwise outcomes.

    Parameters
    ----------
    C : (n, n) array_like
        Comparison matrix. Must be antisymmetric with a zero diagonal.
    kind : {'ordinal', 'cardinal'}
    item_ids : sequence of str, optional
        External identifiers, defaults to ``'0'..'n-1'``.
    """

    C: np.ndarray
    kind: str = ORDINAL
    item_ids: tuple = ()

    def __post_init__(self):
        C = _frozen(self.C)
        if C.ndim != 2 or C.shape[0] != C.shape[1]:
            raise DataError(f"comparison matrix must be square, got shape {C.shape}")
        if not np.all(np.isfinite(C)):
            raise DataError("comparison matrix has non-finite entries")
        if np.any(np.diag(C) != 0):
            raise DataError("comparison matrix must have a zero diagonal")
        if not np.array_equal(C, -C.T):
            raise DataError("comparison matrix must be antisymmetric")
        if self.kind not in (ORDINAL, CARDINAL):
            raise DataError(f"unknown comparison kind {self.kind!r}")
        if self.kind == ORDINAL and not np.all(np.isin(C, (-1.0, 0.0, 1.0))):
            raise DataError("ordinal comparisons must take values in {-1, 0, 1}")
        ids = tuple(str(i) for i in self.item_ids) or tuple(str(i) for i in range(C.shape[0]))
        if len(ids) != C.shape[0]:
            raise DataError(f"{len(ids)} item ids for {C.shape[0]} items")
        if len(set(ids)) != len(ids):
            raise DataError("item ids must be unique")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "item_ids", ids)

    @classmethod
    def from_pairs(cls, n, pairs, kind=ORDINAL, item_ids=()):
        """Build from ``(i, j, outcome)`` triples with integer indices."""
        C = np.zeros((n, n))
        seen = set()
        for i, j, out in pairs:
            i, j = int(i), int(j)
            if i == j:
                raise DataError(f"self comparison for item {i}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise DataError(f"duplicate comparison for pair {key}")
            seen.add(key)
            C[i, j] = out
            C[j, i] = -out
        return cls(C, kind, tuple(item_ids))

    @classmethod
    def from_scores(cls, r, kind=CARDINAL, mask=None, item_ids=()):
        """Noiseless comparisons ``r_i - r_j`` (or their sign) on ``mask``."""
        r = np.asarray(r, dtype=float)
        C = r[:, None] - r[None, :]
        if kind == ORDINAL:
            C = np.sign(C)
        if mask is not None:
            mask = np.asarray(mask, dtype=bool)
            C = np.where(mask | mask.T, C, 0.0)
        np.fill_diagonal(C, 0.0)
        return cls(C, kind, tuple(item_ids))

    @property
    def n(self) -> int:
        return self.C.shape[0]

    @property
    def observed(self) -> np.ndarray:
        """Boolean mask of observed (nonzero) entries."""
        return self.C != 0

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Upper-triangle index arrays ``(i, j)`` of observed pairs."""
        i, j = np.nonzero(np.triu(self.observed, k=1))
        return i, j

    def n_observed(self) -> int:
        return int(np.count_nonzero(np.triu(self.observed, k=1)))

    def degrees(self) -> np.ndarray:
        return self.observed.sum(axis=1)

    def sparsity(self) -> float:
        n = self.n
        if n < 2:
            return 0.0
        return self.n_observed() / (n * (n - 1) / 2)

    def signed(self) -> "ComparisonGraph":
        """Ordinal view of the graph (entrywise sign)."""
        if self.kind == ORDINAL:
            return self
        return ComparisonGraph(np.sign(self.C), ORDINAL, self.item_ids)

    def subgraph(self, idx) -> "ComparisonGraph":
        """Induced subgraph on the items ``idx`` (in that order)."""
        idx = np.asarray(idx, dtype=int)
        return ComparisonGraph(self.C[np.ix_(idx, idx)], self.kind,
                               tuple(self.item_ids[k] for k in idx))

    def permute(self, perm) -> "ComparisonGraph":
        return self.subgraph(perm)

    def with_matrix(self, C) -> "ComparisonGraph":
        return ComparisonGraph(C, self.kind, self.item_ids)


@dataclass(frozen=True)
class FeatureTable:
    """Item covariates, rows aligned with ``ComparisonGraph.item_ids``."""

    Phi: np.ndarray
    column_names: tuple = ()
    sensitive_columns: tuple = ()
    item_ids: tuple = ()

    def __post_init__(self):
        Phi = np.array(self.Phi, dtype=float, copy=True)
        if Phi.ndim == 1:
            Phi = Phi[:, None]
        if Phi.ndim != 2:
            raise DataError("feature matrix must be 2-D")
        if not np.all(np.isfinite(Phi)):
            raise DataError("feature matrix has non-finite entries")
        Phi.setflags(write=False)
        names = tuple(self.column_names) or tuple(f"x{k}" for k in range(Phi.shape[1]))
        if len(names) != Phi.shape[1]:
            raise DataError(f"{len(names)} column names for {Phi.shape[1]} columns")
        sens = tuple(sorted(int(k) for k in self.sensitive_columns))
        if any(k < 0 or k >= Phi.shape[1] for k in sens):
            raise DataError("sensitive column index out of range")
        ids = tuple(str(i) for i in self.item_ids)
        if ids and len(ids) != Phi.shape[0]:
            raise DataError(f"{len(ids)} item ids for {Phi.shape[0]} rows")
        object.__setattr__(self, "Phi", Phi)
        object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "sensitive_columns", sens)
        object.__setattr__(self, "item_ids", ids)

    @property
    def n(self) -> int:
        return self.Phi.shape[0]

    @property
    def p(self) -> int:
        return self.Phi.shape[1]

    @property
    def predictive_columns(self) -> tuple:
        return tuple(k for k in range(self.p) if k not in self.sensitive_columns)

    def predictive(self) -> np.ndarray:
        """Columns used as predictors (everything except sensitive columns)."""
        return self.Phi[:, list(self.predictive_columns)]

    def sensitive(self) -> np.ndarray:
        return self.Phi[:, list(self.sensitive_columns)]

    def rows(self, idx) -> "FeatureTable":
        idx = np.asarray(idx, dtype=int)
        ids = tuple(self.item_ids[k] for k in idx) if self.item_ids else ()
        return FeatureTable(self.Phi[idx], self.column_names, self.sensitive_columns, ids)

    def columns(self, cols) -> "FeatureTable":
        cols = list(cols)
        sens = tuple(cols.index(k) for k in self.sensitive_columns if k in cols)
        return FeatureTable(self.Phi[:, cols], tuple(self.column_names[k] for k in cols),
                            sens, self.item_ids)


def as_features(features) -> FeatureTable:
    if isinstance(features, FeatureTable):
        return features
    return FeatureTable(np.asarray(features, dtype=float))


@dataclass(frozen=True)
class RankResult:
    """Oriented ranking.

    ``scores`` are stored after orientation, so larger is always better and
    ``ordering`` lists item indices from best to worst.
    """

    scores: np.ndarray
    ordering: np.ndarray
    upsets: int
    upset_fraction: float
    orientation: str
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def ranks(self) -> np.ndarray:
        """1-based rank of every item (1 = best)."""
        ranks = np.empty(len(self.ordering), dtype=int)
        ranks[self.ordering] = np.arange(1, len(self.ordering) + 1)
        return ranks


def sort_descending(scores) -> np.ndarray:
    """Indices by decreasing score, ties broken by ascending index."""
    scores = np.asarray(scores, dtype=float)
    return np.lexsort((np.arange(len(scores)), -scores))


def similarity_matrix(g: ComparisonGraph) -> np.ndarray:
    """Agreement similarity ``S = (n 11^T + C C^T) / 2`` for ordinal comparisons."""
    if g.kind != ORDINAL:
        raise DataError("similarity matrix needs ordinal comparisons; "
                        "convert cardinal data with ComparisonGraph.signed() first")
    C = g.C
    S = 0.5 * (g.n + C @ C.T)
    return 0.5 * (S + S.T)


def count_upsets(g: ComparisonGraph, scores) -> int:
    """Number of observed pairs whose outcome disagrees with ``scores``.

    A pair with tied scores is never an upset.
    """
    scores = np.asarray(scores, dtype=float)
    if scores.shape != (g.n,):
        raise DataError(f"expected {g.n} scores, got shape {scores.shape}")
    i, j = g.edges()
    return int(np.count_nonzero(np.sign(scores[i] - scores[j]) * np.sign(g.C[i, j]) < 0))


def kendall_tau(a, b) -> float:
    """Kendall's tau-a: ``(concordant - discordant) / (n (n - 1) / 2)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("kendall_tau needs two vectors of equal length")
    n = len(a)
    if n < 2:
        raise ValueError("kendall_tau needs at least two items")
    iu = np.triu_indices(n, k=1)
    da = np.sign(a[:, None] - a[None, :])[iu]
    db = np.sign(b[:, None] - b[None, :])[iu]
    return float(np.sum(da * db) / (n * (n - 1) / 2))


def orient_ranking(g: ComparisonGraph, scores, diagnostics=None) -> RankResult:
    """Pick the sign of ``scores`` with fewer upsets (``as_is`` on a tie)."""
    scores = np.asarray(scores, dtype=float)
    if scores.shape != (g.n,):
        raise DataError(f"expected {g.n} scores, got shape {scores.shape}")
    if not np.all(np.isfinite(scores)):
        raise DataError("scores must be finite")
    up = count_upsets(g, scores)
    up_rev = count_upsets(g, -scores)
    if up_rev < up:
        scores, up, orientation = -scores, up_rev, "reversed"
    else:
        orientation = "as_is"
    m = g.n_observed()
    scores = scores + 0.0  # normalise -0.0
    return RankResult(
        scores=scores,
        ordering=sort_descending(scores),
        upsets=up,
        upset_fraction=up / m if m else 0.0,
        orientation=orientation,
        diagnostics=dict(diagnostics or {}),
    )


def degree_normalize(g: ComparisonGraph) -> np.ndarray:
    """Row-normalised comparisons ``D^{-1} C`` with D the total degree."""
    d = g.degrees()
    isolated = np.flatnonzero(d == 0)
    if isolated.size:
        k = int(isolated[0])
        raise DataError(f"item {g.item_ids[k]!r} (index {k}) has no comparisons")
    return g.C / d[:, None]


def validate_alignment(g: ComparisonGraph, features: FeatureTable) -> None:
    if features.n != g.n:
        raise DataError(f"feature table has {features.n} rows for {g.n} items")
    if features.item_ids and tuple(features.item_ids) != tuple(g.item_ids):
        raise DataError("feature rows are not aligned with comparison item ids")


def permutation_inverse(perm: Sequence[int]) -> np.ndarray:
    perm = np.asarray(perm, dtype=int)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm))
    return inv
