"""
CSV and JSON formats.

Comparisons: header ``i,j,outcome``, one row per observed pair.
Features: header ``id,<name1>,...,<namep>``.
Rankings: header ``id,score,rank`` with rank 1 the best item.
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .core import (CARDINAL, ORDINAL, ComparisonGraph, DataError, FeatureTable, RankResult,
                   sort_descending)
from .rankers import FittedModel


def _num(text, path, line, what):
    try:
        v = float(text)
    except (TypeError, ValueError):
        raise DataError(f"{path}:{line}: {what} {text!r} is not a number") from None
    if not math.isfinite(v):
        raise DataError(f"{path}:{line}: {what} {text!r} is not finite")
    return v


def fmt_float(v) -> str:
    v = float(v)
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _read_rows(path, header):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if [h.strip() for h in first[:len(header)]] != list(header):
            raise DataError(f"{path}:1: expected header starting with {','.join(header)}")
        rows = [(k + 2, row) for k, row in enumerate(reader) if row]
    return [h.strip() for h in first], rows


def read_comparison_rows(path):
    """Raw ``(i, j, outcome)`` triples with their line numbers."""
    _, rows = _read_rows(path, ("i", "j", "outcome"))
    out = []
    for line, row in rows:
        if len(row) != 3:
            raise DataError(f"{path}:{line}: expected 3 fields, got {len(row)}")
        i, j = row[0].strip(), row[1].strip()
        if i == j:
            raise DataError(f"{path}:{line}: item {i!r} compared with itself")
        out.append((line, i, j, _num(row[2].strip(), path, line, "outcome")))
    return out


def read_features(path, sensitive=()) -> FeatureTable:
    """Feature table; ``sensitive`` names columns to mark as sensitive."""
    header, rows = _read_rows(path, ("id",))
    names = header[1:]
    if not names:
        raise DataError(f"{path}:1: no feature columns")
    ids, data = [], []
    for line, row in rows:
        if len(row) != len(header):
            raise DataError(f"{path}:{line}: expected {len(header)} fields, got {len(row)}")
        ids.append(row[0].strip())
        data.append([_num(c.strip(), path, line, f"feature {names[k]!r}")
                     for k, c in enumerate(row[1:])])
    if len(set(ids)) != len(ids):
        raise DataError(f"{path}: duplicate item ids")
    unknown = [s for s in sensitive if s not in names]
    if unknown:
        raise DataError(f"{path}: unknown sensitive column(s) {', '.join(unknown)}")
    sens = tuple(names.index(s) for s in sensitive)
    return FeatureTable(np.array(data, dtype=float).reshape(len(ids), len(names)),
                        tuple(names), sens, tuple(ids))


def load_dataset(comparisons_path, features_path=None, kind="auto", sensitive=()):
    """Read comparisons (and optionally features) into aligned objects.

    With a feature file the items are its rows, in file order, and every id
    in the comparisons must appear there. Without one, items are numbered by
    first appearance in the comparisons.
    """
    rows = read_comparison_rows(comparisons_path)
    features = None
    if features_path is not None:
        features = read_features(features_path, sensitive)
        ids = list(features.item_ids)
        index = {s: k for k, s in enumerate(ids)}
        for line, i, j, _ in rows:
            for s in (i, j):
                if s not in index:
                    raise DataError(f"{comparisons_path}:{line}: item id {s!r} missing "
                                    f"from features file {features_path}")
    else:
        ids, index = [], {}
        for _, i, j, _ in rows:
            for s in (i, j):
                if s not in index:
                    index[s] = len(ids)
                    ids.append(s)
    if kind == "auto":
        kind = ORDINAL if all(o in (-1.0, 0.0, 1.0) for *_, o in rows) else CARDINAL
    elif kind not in (ORDINAL, CARDINAL):
        raise DataError(f"unknown comparison kind {kind!r}")
    n = len(ids)
    C = np.zeros((n, n))
    seen = {}
    for line, i, j, o in rows:
        a, b = index[i], index[j]
        key = (min(a, b), max(a, b))
        if key in seen:
            raise DataError(f"{comparisons_path}:{line}: duplicate pair ({i}, {j}), "
                            f"first given on line {seen[key]}")
        seen[key] = line
        if kind == ORDINAL and o not in (-1.0, 0.0, 1.0):
            raise DataError(f"{comparisons_path}:{line}: ordinal outcome must be -1, 0 or 1")
        C[a, b] = o
        C[b, a] = -o
    return ComparisonGraph(C, kind, tuple(ids)), features


def write_comparisons(g: ComparisonGraph, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "outcome"])
        for a, b in zip(*g.edges()):
            w.writerow([g.item_ids[a], g.item_ids[b], fmt_float(g.C[a, b])])


def write_features(features: FeatureTable, path, item_ids=None):
    ids = item_ids or features.item_ids or [str(k) for k in range(features.n)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", *features.column_names])
        for s, row in zip(ids, features.Phi):
            w.writerow([s, *(repr(float(v)) for v in row)])


def write_scores(ids, scores, path, header=("id", "score", "rank")):
    """Rows sorted best first; ties keep ascending item index."""
    order = sort_descending(scores)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for rank, k in enumerate(order, start=1):
            w.writerow([ids[k], repr(float(scores[k])), rank])


def write_ranking(result: RankResult, ids, path):
    write_scores(ids, result.scores, path)


def write_truth(ids, r_true, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "r_true"])
        for s, v in zip(ids, r_true):
            w.writerow([s, repr(float(v))])


def write_json(doc, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_default)
        fh.write("\n")


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


def save_model(model: FittedModel, path, column_names=()):
    doc = model.to_dict()
    doc["column_names"] = list(column_names)
    write_json(doc, path)


def load_model(path) -> FittedModel:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not a model file ({exc})") from None
    try:
        model = FittedModel.from_dict(doc)
    except (KeyError, ValueError, TypeError) as exc:
        raise DataError(f"{path}: incomplete model ({exc})") from None
    model.extras.setdefault("column_names", doc.get("column_names", []))
    return model
