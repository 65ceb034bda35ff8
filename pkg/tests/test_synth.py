import numpy as np
import pytest
from scipy import stats
from scipy.sparse.csgraph import connected_components

from covrank.core import CARDINAL, ORDINAL, ComparisonGraph, DataError
from covrank.synth import (SynthConfig, apply_ero, apply_flip, generate, generate_players,
                           sample_graph, skill)


def test_skill_formula():
    assert skill(0.5) == pytest.approx(np.sin(1.5 * np.pi) - 0.375)
    assert skill(0.5) == pytest.approx(-1.375)


def test_players_noiseless():
    x, r = generate_players(SynthConfig(n=50, seed=1))
    assert np.all((0 <= x) & (x <= 1))
    assert np.array_equal(r, np.sin(3 * np.pi * x) - 1.5 * x ** 2)


def test_players_deterministic():
    cfg = SynthConfig(n=30, sigma=0.5, seed=9)
    a, b = generate_players(cfg), generate_players(cfg)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_complete_graph():
    cfg = SynthConfig(n=20, sparsity=1.0, seed=0)
    g, added = sample_graph(np.arange(20.0), cfg)
    assert g.n_observed() == 190 and added == 0


def test_ordinal_rule():
    cfg = SynthConfig(n=10, sparsity=1.0, kind=ORDINAL)
    r = np.arange(10.0)
    g, _ = sample_graph(r, cfg)
    assert np.array_equal(g.C, np.sign(r[:, None] - r[None, :]))


def test_realised_sparsity():
    vals = []
    for seed in range(100):
        cfg = SynthConfig(n=1000, sparsity=0.008, seed=seed)
        g, _ = sample_graph(np.arange(1000.0), cfg)
        vals.append(g.sparsity())
    pairs = 1000 * 999 / 2
    sd = np.sqrt(0.008 * 0.992 / pairs)
    # repair edges add at most n - 1 pairs on top of the binomial draw
    assert abs(np.mean(vals) - 0.008) <= 3 * sd / 10 + 999 / pairs
    assert all(abs(v - 0.008) <= 3 * sd + 999 / pairs for v in vals)


def test_graph_always_connected():
    for seed in range(20):
        cfg = SynthConfig(n=300, sparsity=0.004, seed=seed)
        g, _ = sample_graph(np.arange(300.0), cfg)
        assert connected_components(g.observed, directed=False)[0] == 1


def test_flip_identity_and_full():
    g = ComparisonGraph.from_scores(np.arange(8.0), ORDINAL)
    assert np.array_equal(apply_flip(g, 0.0, 1).C, g.C)
    assert np.array_equal(apply_flip(g, 1.0, 1).C, -g.C)


def test_flip_rate():
    r = np.arange(46.0)   # 1035 pairs
    g = ComparisonGraph.from_scores(r, ORDINAL)
    iu = np.triu_indices(46, 1)
    rates = [np.mean(apply_flip(g, 0.3, s).C[iu] != g.C[iu]) for s in range(100)]
    assert np.mean(rates) == pytest.approx(0.3, abs=0.01)


def test_flip_keeps_support_and_antisymmetry():
    rng = np.random.default_rng(0)
    cfg = SynthConfig(n=40, sparsity=0.2, kind=ORDINAL)
    g, _ = sample_graph(rng.standard_normal(40), cfg)
    f = apply_flip(g, 0.4, 3)
    assert np.array_equal(f.observed, g.observed)
    assert np.array_equal(f.C, -f.C.T)


def test_flip_rejects_cardinal():
    with pytest.raises(DataError):
        apply_flip(ComparisonGraph.from_scores([1.0, 2.0]), 0.1)


def test_ero_identity():
    g = ComparisonGraph.from_scores(np.arange(6.0))
    assert np.array_equal(apply_ero(g, 0.0, np.arange(6.0), 0).C, g.C)


def test_ero_bounds_and_support():
    rng = np.random.default_rng(2)
    r = rng.standard_normal(50)
    cfg = SynthConfig(n=50, sparsity=0.3)
    g, _ = sample_graph(r, cfg)
    e = apply_ero(g, 0.5, r, 4)
    M = r.max() - r.min()
    assert np.abs(e.C).max() <= M
    assert np.array_equal(e.observed, g.observed)
    assert np.array_equal(e.C, -e.C.T)


def test_ero_full_replacement_is_uniform():
    r = np.random.default_rng(0).standard_normal(142)   # about 10^4 pairs
    g = ComparisonGraph.from_scores(r)
    e = apply_ero(g, 1.0, r, 11)
    M = r.max() - r.min()
    vals = np.abs(e.C[np.triu_indices(142, 1)])
    assert len(vals) >= 10_000
    assert stats.kstest(vals, stats.uniform(0, M).cdf).pvalue > 0.01


def test_ero_rejects_ordinal():
    with pytest.raises(DataError):
        apply_ero(ComparisonGraph.from_scores([1.0, 2.0], ORDINAL), 0.1, [1.0, 2.0])


def test_config_validation():
    with pytest.raises(ValueError):
        SynthConfig(sparsity=0.0)
    with pytest.raises(ValueError):
        SynthConfig(noise="flip", kind=CARDINAL)
    with pytest.raises(ValueError):
        SynthConfig(noise_level=1.5)


def test_generate_deterministic():
    cfg = SynthConfig(n=60, sparsity=0.1, sigma=0.3, noise="ero", noise_level=0.2, seed=5)
    a, b = generate(cfg), generate(cfg)
    assert np.array_equal(a.graph.C, b.graph.C) and np.array_equal(a.x, b.x)
    c = generate(SynthConfig(n=60, sparsity=0.1, sigma=0.3, noise="ero", noise_level=0.2, seed=6))
    assert not np.array_equal(a.x, c.x)
