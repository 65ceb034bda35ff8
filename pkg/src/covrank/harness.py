"""
Hyperparameter cross-validation and the synthetic / prediction experiment
protocols.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import rankers
from .core import ComparisonGraph, DataError, FeatureTable, as_features, kendall_tau
from .kernels import LINEAR, KernelSpec, kernel_matrix, median_heuristic
from .numlin import NumericalError
from .predict import predict_unseen, predict_upset_fraction
from .synth import SynthConfig, generate

ALGORITHMS = ("serial", "cserial", "svd", "svdn", "svdc", "svdk", "svdkfair", "kcca", "rc")
ALIASES = {"ser": "serial", "cs": "cserial", "ipr": "rc"}
FEATURE_ALGOS = ("cserial", "svdc", "svdk", "svdkfair", "kcca")
PREDICTIVE_ALGOS = ("svdc", "svdk", "svdkfair", "kcca")

LAMBDA_GRID = (0.0, 1e-2, 1e-1, 1.0, 10.0, 1e2)
LENGTHSCALE_MULTIPLIERS = (0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 10.0)
EPSILON_MULTIPLIERS = (1e-4, 1e-3, 1e-2, 1e-1)

REPORT_COLUMNS = ("algo", "noise_kind", "noise_level", "sigma", "seed", "kendall_tau",
                  "upset_fraction", "wall_time_ms")


def canonical_algo(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {name!r}; choose from {', '.join(ALGORITHMS)}")
    return name


def fit(algo, g: ComparisonGraph, features=None, lam=None, lengthscale=None, epsilon=None,
        fair_lam=0.0, kernel="rbf"):
    """Run one ranker by tag. Returns ``(RankResult, FittedModel or None)``."""
    algo = canonical_algo(algo)
    if algo in FEATURE_ALGOS and features is None:
        raise DataError(f"{algo} needs item features")
    spec = KernelSpec(kernel, lengthscale if kernel != LINEAR else None)
    if algo == "serial":
        return rankers.serial_rank(g), None
    if algo == "cserial":
        return rankers.c_serial_rank(g, features, spec, 1.0 if lam is None else lam), None
    if algo == "svd":
        return rankers.svd_rank(g), None
    if algo == "svdn":
        return rankers.svd_rank(g, normalized=True), None
    if algo == "svdc":
        return rankers.svdcov_rank(g, features)
    if algo == "svdk":
        return rankers.svdkcov_rank(g, features, spec)
    if algo == "svdkfair":
        return rankers.svdkfair_rank(g, features, spec, rankers.FairnessConfig(fair_lam))
    if algo == "kcca":
        return rankers.kcca_rank(g, features, spec, epsilon)
    return rankers.rc_rank(g), None


@dataclass(frozen=True)
class CvPlan:
    """Cross-validation plan.

    ``None`` grids fall back to the defaults: ``lambda`` over
    ``LAMBDA_GRID * n / trace(K)``, lengthscales over the median heuristic
    times ``LENGTHSCALE_MULTIPLIERS`` and KCCA ``epsilon`` over
    ``n * EPSILON_MULTIPLIERS``.
    """

    folds: int = 10
    lambda_grid: tuple | None = None
    lengthscale_grid: tuple | None = None
    epsilon_grid: tuple | None = None
    metric: str = "upset_fraction"
    seed: int = 0

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("need at least two folds")
        for grid in (self.lambda_grid, self.lengthscale_grid, self.epsilon_grid):
            if grid is not None and len(grid) == 0:
                raise ValueError("grids must be non-empty")
        if self.metric != "upset_fraction":
            raise ValueError("only the upset_fraction metric is supported")


@dataclass
class CvResult:
    best: dict
    score: float
    cells: list


def _cells(algo, g, X, plan: CvPlan):
    n = g.n
    ls = [None]
    if algo in ("cserial", "svdk", "svdkfair", "kcca"):
        if plan.lengthscale_grid is not None:
            ls = sorted(plan.lengthscale_grid)
        else:
            med = median_heuristic(X)
            ls = [float(med * m) for m in LENGTHSCALE_MULTIPLIERS]
    cells = []
    for d in ls:
        if algo == "cserial":
            if plan.lambda_grid is not None:
                lams = sorted(plan.lambda_grid)
            else:
                scale = n / np.trace(kernel_matrix(X, KernelSpec("rbf", d)))
                lams = [float(v * scale) for v in LAMBDA_GRID]
            cells += [{"lam": lam, "lengthscale": d} for lam in lams]
        elif algo == "kcca":
            eps = sorted(plan.epsilon_grid) if plan.epsilon_grid is not None else \
                [float(n * m) for m in EPSILON_MULTIPLIERS]
            cells += [{"epsilon": e, "lengthscale": d} for e in eps]
        else:
            cells.append({"lengthscale": d} if d is not None else {})
    return cells


def fold_assignment(g: ComparisonGraph, folds: int, seed: int):
    """Split the observed matches (not items) into ``folds`` groups."""
    i, j = g.edges()
    m = len(i)
    if m < folds:
        raise DataError(f"{m} observed matches cannot fill {folds} folds")
    perm = np.random.default_rng(seed).permutation(m)
    return [(i[idx], j[idx]) for idx in np.array_split(perm, folds)]


def _holdout_upsets(C, scores, i, j):
    return float(np.mean(np.sign(scores[i] - scores[j]) * np.sign(C[i, j]) < 0))


def cross_validate(g: ComparisonGraph, features, algo, plan: CvPlan = CvPlan(), **fixed):
    """Grid search by upset fraction on held-out matches.

    Held-out matches are zeroed in the training graph, so item alignment
    with the feature rows is kept. Ties go to the smaller ``lambda`` (or
    ``epsilon``), then the smaller lengthscale.
    """
    algo = canonical_algo(algo)
    X = None
    if features is not None:
        features = as_features(features)
        X = features.predictive()
    folds = fold_assignment(g, plan.folds, plan.seed)
    train_graphs = []
    for i, j in folds:
        C = g.C.copy()
        C[i, j] = 0.0
        C[j, i] = 0.0
        train_graphs.append(g.with_matrix(C))
    cells = []
    for cell in _cells(algo, g, X, plan):
        scores = []
        for (i, j), gt in zip(folds, train_graphs):
            try:
                res, _ = fit(algo, gt, features, **cell, **fixed)
                scores.append(_holdout_upsets(g.C, res.scores, i, j))
            except (NumericalError, DataError, np.linalg.LinAlgError):
                scores.append(math.inf)
        cells.append({**cell, "score": float(np.mean(scores)), "fold_scores": scores})

    def key(c):
        return (c["score"], c.get("lam", c.get("epsilon", 0.0)), c.get("lengthscale") or 0.0)

    best = min(cells, key=key)
    params = {k: v for k, v in best.items() if k not in ("score", "fold_scores")}
    return CvResult(params, best["score"], cells)


@dataclass
class ExperimentReport:
    records: list = field(default_factory=list)

    def sorted_records(self):
        return sorted(self.records, key=lambda r: (r["algo"], r["noise_kind"], r["noise_level"],
                                                   r["sigma"], r["seed"]))

    def aggregates(self):
        cells = {}
        for r in self.sorted_records():
            cells.setdefault((r["algo"], r["noise_kind"], r["noise_level"], r["sigma"]), []).append(r)
        out = []
        for (algo, kind, level, sigma), recs in cells.items():
            row = {"algo": algo, "noise_kind": kind, "noise_level": level, "sigma": sigma,
                   "runs": len(recs)}
            ok = [r for r in recs if r.get("status", "ok") == "ok"]
            row["failed"] = len(recs) - len(ok)
            for metric in ("kendall_tau", "upset_fraction"):
                vals = np.array([r[metric] for r in ok if r[metric] is not None
                                 and not math.isnan(r[metric])], dtype=float)
                row[f"{metric}_mean"] = float(vals.mean()) if vals.size else None
                row[f"{metric}_std"] = float(vals.std()) if vals.size else None
            out.append(row)
        return out

    def mean(self, algo, metric="kendall_tau", **where):
        vals = [r[metric] for r in self.records if r["algo"] == algo
                and r.get("status", "ok") == "ok" and r[metric] is not None
                and not math.isnan(r[metric])
                and all(r[k] == v for k, v in where.items())]
        return float(np.mean(vals)) if vals else math.nan

    def to_csv(self, path, timing=True):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(REPORT_COLUMNS)
            for r in self.sorted_records():
                row = dict(r, wall_time_ms=r["wall_time_ms"] if timing else 0.0)
                w.writerow([_fmt(row[c]) for c in REPORT_COLUMNS])

    def to_json(self, path, timing=True):
        recs = []
        for r in self.sorted_records():
            r = dict(r)
            if not timing:
                r["wall_time_ms"] = 0.0
            recs.append({k: _jsonable(v) for k, v in r.items()})
        doc = {"records": recs,
               "aggregates": [{k: _jsonable(v) for k, v in a.items()} for a in self.aggregates()]}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _fmt(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return None if math.isnan(v) or math.isinf(v) else v
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _tuned_params(algo, g, features, plan, params):
    fixed = dict(params.get(algo, {}))
    if plan is None or algo not in ("cserial", "svdk", "svdkfair", "kcca"):
        return fixed
    tunable = {"lam", "lengthscale", "epsilon"}
    if tunable & fixed.keys():
        return fixed
    cv = cross_validate(g, features, algo, plan, **fixed)
    return {**fixed, **cv.best}


def run_noise_sweep(base: SynthConfig, noise_levels, algos, sigmas=None, seeds=range(20),
                    plan: CvPlan | None = None, params=None) -> ExperimentReport:
    """Kendall tau of every ranker over a grid of noise levels, sigmas and seeds.

    With a ``plan`` the hyperparameters of the kernel rankers are re-tuned
    by cross-validation in every cell; ``params`` maps an algorithm tag to
    fixed keyword arguments (which disable tuning for that algorithm).
    Failures are recorded per cell with ``status='failed'``.
    """
    algos = [canonical_algo(a) for a in algos]
    params = params or {}
    sigmas = [base.sigma] if sigmas is None else list(sigmas)
    report = ExperimentReport()
    for level in noise_levels:
        for sigma in sigmas:
            for seed in seeds:
                cfg = replace(base, noise_level=level, sigma=sigma, seed=seed)
                data = generate(cfg)
                feats = data.features
                for algo in algos:
                    rec = {"algo": algo, "noise_kind": cfg.noise, "noise_level": level,
                           "sigma": sigma, "seed": seed, "kendall_tau": math.nan,
                           "upset_fraction": math.nan, "wall_time_ms": 0.0, "status": "ok"}
                    t0 = time.perf_counter()
                    try:
                        p = _tuned_params(algo, data.graph, feats, plan, params)
                        res, _ = fit(algo, data.graph, feats, **p)
                        rec["kendall_tau"] = kendall_tau(res.scores, data.r_true)
                        rec["upset_fraction"] = res.upset_fraction
                        rec["params"] = p
                    except (NumericalError, DataError, np.linalg.LinAlgError) as exc:
                        rec["status"] = "failed"
                        rec["error"] = str(exc)
                    rec["wall_time_ms"] = 1000.0 * (time.perf_counter() - t0)
                    report.records.append(rec)
    return report


def train_test_split(n, split, rng):
    perm = rng.permutation(n)
    k = int(round(split * n))
    return np.sort(perm[:k]), np.sort(perm[k:])


def run_prediction_experiment(g: ComparisonGraph, features, algos, repeats=20, split=0.7,
                              seed=0, r_true=None, plan: CvPlan | None = None, params=None,
                              sigma=0.0) -> ExperimentReport:
    """Repeated item-level train/test splits; every algorithm sees the same splits.

    Models are fitted on the subgraph induced by the training items and
    score the test items from their features alone. Records carry the
    test-test upset fraction and, when ``r_true`` is known, the Kendall tau
    of the predicted test scores against it.
    """
    if not 0 < split < 1:
        raise ValueError("split must be in (0, 1)")
    algos = [canonical_algo(a) for a in algos]
    bad = [a for a in algos if a not in PREDICTIVE_ALGOS]
    if bad:
        raise ValueError(f"{', '.join(bad)} cannot predict unseen items")
    features = as_features(features)
    params = params or {}
    report = ExperimentReport()
    rng = np.random.default_rng(seed)
    for rep in range(repeats):
        tr, te = train_test_split(g.n, split, rng)
        g_tr, g_te = g.subgraph(tr), g.subgraph(te)
        if g_tr.n_observed() == 0:
            raise DataError("training subgraph has no comparisons")
        f_tr, f_te = features.rows(tr), features.rows(te)
        for algo in algos:
            rec = {"algo": algo, "noise_kind": "prediction", "noise_level": split,
                   "sigma": sigma, "seed": rep, "kendall_tau": math.nan,
                   "upset_fraction": math.nan, "wall_time_ms": 0.0, "status": "ok"}
            t0 = time.perf_counter()
            try:
                p = _tuned_params(algo, g_tr, f_tr, plan, params)
                res, model = fit(algo, g_tr, f_tr, **p)
                pred = predict_unseen(model, f_te)
                if r_true is not None:
                    rec["kendall_tau"] = kendall_tau(pred.scores, np.asarray(r_true)[te])
                if g_te.n_observed():
                    rec["upset_fraction"] = predict_upset_fraction(g_te, pred)
                fitted = predict_unseen(model, f_tr).scores
                rec["train_reproduction_error"] = float(np.max(np.abs(fitted - model.train_scores)))
                rec["params"] = p
            except (NumericalError, DataError, np.linalg.LinAlgError) as exc:
                rec["status"] = "failed"
                rec["error"] = str(exc)
            rec["wall_time_ms"] = 1000.0 * (time.perf_counter() - t0)
            report.records.append(rec)
    return report
