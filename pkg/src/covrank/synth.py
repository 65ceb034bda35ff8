"""
Synthetic players, comparison graphs and the FLIP / ERO noise models.

Skills follow ``r_i = f(x_i) + sigma * N(0, 1)`` with
``f(x) = sin(3 pi x) - 1.5 x^2`` and ``x_i ~ U[0, 1]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .core import CARDINAL, ORDINAL, ComparisonGraph, DataError, FeatureTable

NOISE_KINDS = ("none", "flip", "ero")


@dataclass(frozen=True)
class SynthConfig:
    n: int = 200
    sparsity: float = 0.05
    sigma: float = 0.0
    noise: str = "none"
    noise_level: float = 0.0
    kind: str = CARDINAL
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two players")
        if not 0 < self.sparsity <= 1:
            raise ValueError("sparsity must be in (0, 1]")
        if self.noise not in NOISE_KINDS:
            raise ValueError(f"noise must be one of {NOISE_KINDS}")
        if not 0 <= self.noise_level <= 1:
            raise ValueError("noise level must be in [0, 1]")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        if self.noise == "flip" and self.kind != ORDINAL:
            raise ValueError("FLIP noise applies to ordinal comparisons")
        if self.noise == "ero" and self.kind != CARDINAL:
            raise ValueError("ERO noise applies to cardinal comparisons")

    def streams(self):
        """Independent generators for players, graph and noise."""
        return [np.random.default_rng(s) for s in np.random.SeedSequence(self.seed).spawn(3)]


def skill(x):
    x = np.asarray(x, dtype=float)
    return np.sin(3 * np.pi * x) - 1.5 * x ** 2


def generate_players(cfg: SynthConfig, rng=None):
    """Sample ``x ~ U[0, 1]`` and noisy skills ``r = f(x) + sigma * N(0, 1)``."""
    if rng is None:
        rng = cfg.streams()[0]
    x = rng.uniform(0.0, 1.0, cfg.n)
    r = skill(x) + cfg.sigma * rng.standard_normal(cfg.n)
    return x, r


def _connect(mask, rng):
    """Join the components of an undirected boolean adjacency with a random spanning tree."""
    ncomp, labels = connected_components(sparse.csr_matrix(mask), directed=False)
    added = 0
    if ncomp > 1:
        order = rng.permutation(ncomp)
        for k in range(1, ncomp):
            a = order[rng.integers(k)]
            u = rng.choice(np.flatnonzero(labels == a))
            v = rng.choice(np.flatnonzero(labels == order[k]))
            mask[u, v] = mask[v, u] = True
            added += 1
    return added


def sample_graph(r_true, cfg: SynthConfig, rng=None):
    """Erdos-Renyi comparison graph with edge probability ``cfg.sparsity``.

    Disconnected samples are repaired with a random spanning tree over the
    components. Returns the graph and the number of repair edges.
    """
    r = np.asarray(r_true, dtype=float)
    if not np.all(np.isfinite(r)):
        raise DataError("skills must be finite")
    if not 0 < cfg.sparsity <= 1:
        raise DataError("sparsity must be in (0, 1]")
    if rng is None:
        rng = cfg.streams()[1]
    n = len(r)
    upper = np.triu(rng.random((n, n)) < cfg.sparsity, k=1)
    mask = upper | upper.T
    added = _connect(mask, rng)
    g = ComparisonGraph.from_scores(r, kind=cfg.kind, mask=mask)
    return g, added


def apply_flip(g: ComparisonGraph, p: float, seed=0) -> ComparisonGraph:
    """Negate every observed ordinal outcome independently with probability ``p``."""
    if g.kind != ORDINAL:
        raise DataError("FLIP noise needs ordinal comparisons")
    if not 0 <= p <= 1:
        raise ValueError("p must be in [0, 1]")
    rng = np.random.default_rng(seed)
    n = g.n
    flip = np.triu(rng.random((n, n)) < p, k=1)
    flip = flip | flip.T
    return g.with_matrix(np.where(flip, -g.C, g.C))


def apply_ero(g: ComparisonGraph, eta: float, r_true, seed=0) -> ComparisonGraph:
    """Replace observed cardinal comparisons with ``M U``, ``U ~ U[-1, 1]``, w.p. ``eta``.

    ``M = max_{i,j} (r_i - r_j)`` over all pairs of the true skills.
    """
    if g.kind != CARDINAL:
        raise DataError("ERO noise needs cardinal comparisons")
    if not 0 <= eta <= 1:
        raise ValueError("eta must be in [0, 1]")
    r = np.asarray(r_true, dtype=float)
    M = float(r.max() - r.min())
    rng = np.random.default_rng(seed)
    n = g.n
    hit = np.triu(rng.random((n, n)) < eta, k=1) & np.triu(g.observed, k=1)
    vals = np.triu(M * rng.uniform(-1.0, 1.0, (n, n)), k=1)
    C = np.triu(g.C, k=1)
    C = np.where(hit, vals, C)
    # a replacement of exactly zero would delete the match
    C = np.where(hit & (C == 0), M * 1e-12, C)
    return g.with_matrix(C - C.T)


@dataclass(frozen=True)
class SynthData:
    x: np.ndarray
    r_true: np.ndarray
    clean: ComparisonGraph
    graph: ComparisonGraph
    repair_edges: int

    @property
    def features(self) -> FeatureTable:
        return FeatureTable(self.x[:, None], ("x",))


def generate(cfg: SynthConfig) -> SynthData:
    """Players, graph and noisy comparisons, reproducible from ``cfg.seed``."""
    rp, rg, rn = cfg.streams()
    x, r = generate_players(cfg, rp)
    clean, added = sample_graph(r, cfg, rg)
    noise_seed = int(rn.integers(2 ** 63))
    if cfg.noise == "flip":
        g = apply_flip(clean, cfg.noise_level, noise_seed)
    elif cfg.noise == "ero":
        g = apply_ero(clean, cfg.noise_level, r, noise_seed)
    else:
        g = clean
    return SynthData(x, r, clean, g, added)
