"""Repeated stratified k-fold evaluation of classifier families.

For every (family, combination, repetition) cell a fresh fold plan is
drawn, each fold is held out once, and fold metrics are averaged into one
per-repetition triple. Per-repetition triples feed the grand means and the
boxplot summaries.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import models
from .features import FeatureMatrix

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed; order matters."""
    h = 0
    for p in parts:
        h = splitmix64(h ^ (int(p) & MASK64))
    return h


def family_ordinal(family: str) -> int:
    if family in models.FAMILIES:
        return models.FAMILIES.index(family)
    return 1000 + zlib.crc32(family.encode())


@dataclass(frozen=True)
class FoldPlan:
    k: int
    repetition: int
    seed: int
    folds: tuple[np.ndarray, ...]

    def train_test(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        test = self.folds[fold]
        train = np.sort(np.concatenate([f for i, f in enumerate(self.folds) if i != fold]))
        return train, test


def stratified_kfold(labels, k: int = 5, seed: int = 0, repetition: int = 0) -> FoldPlan:
    """Shuffle each class with ``seed``, then deal rows round-robin into k folds.

    Dealing continues across classes (negatives first, then positives), so
    fold sizes differ by at most one and so do the per-class counts.
    """
    y = np.asarray(labels)
    if k < 2:
        raise ValueError("k must be at least 2")
    rng = np.random.default_rng(seed)
    order = []
    for cls in (0, 1):
        members = np.flatnonzero(y == cls)
        if 0 < members.size < k:
            raise ValueError(f"class {cls} has {members.size} rows, fewer than k={k}")
        order.append(rng.permutation(members))
    order = np.concatenate(order)
    assignment = np.arange(order.size) % k
    folds = tuple(np.sort(order[assignment == f]) for f in range(k))
    return FoldPlan(k, repetition, seed, folds)


@dataclass(frozen=True)
class MetricTriple:
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


def f1_from(precision: float, recall: float) -> float:
    return 0.0 if precision + recall == 0 else 2.0 * precision * recall / (precision + recall)


def compute_metrics(predicted, actual) -> MetricTriple:
    """Precision, recall and F1 for the positive class; empty denominators give 0."""
    p = np.asarray(predicted)
    a = np.asarray(actual)
    if p.shape != a.shape:
        raise ValueError(f"length mismatch: {p.shape[0]} predictions vs {a.shape[0]} labels")
    if p.size == 0:
        raise ValueError("cannot score an empty prediction list")
    tp = int(np.sum((p == 1) & (a == 1)))
    pred_pos = int(np.sum(p == 1))
    actual_pos = int(np.sum(a == 1))
    precision = tp / pred_pos if pred_pos else 0.0
    recall = tp / actual_pos if actual_pos else 0.0
    return MetricTriple(precision, recall, f1_from(precision, recall))


def mean_triple(triples: Sequence[MetricTriple]) -> MetricTriple:
    n = len(triples)
    return MetricTriple(
        sum(t.precision for t in triples) / n,
        sum(t.recall for t in triples) / n,
        sum(t.f1 for t in triples) / n,
    )


@dataclass(frozen=True)
class BoxplotSummary:
    min: float
    q1: float
    median: float
    q3: float
    max: float
    outliers: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["outliers"] = list(self.outliers)
        return d


def summarize_boxplot(values) -> BoxplotSummary:
    """Quartiles by linear interpolation, 1.5 IQR fences, whiskers at the
    most extreme non-outliers."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise ValueError("summarize_boxplot needs at least one value")
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    iqr = q3 - q1
    lo, hi = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = v[(v >= lo) & (v <= hi)]
    outliers = tuple(float(x) for x in v[(v < lo) | (v > hi)])
    return BoxplotSummary(float(inside.min()), float(q1), float(med), float(q3),
                          float(inside.max()), outliers)


@dataclass
class CellResult:
    family: str
    combination: int
    per_rep: list[MetricTriple]

    @property
    def mean(self) -> MetricTriple:
        return mean_triple(self.per_rep)

    def boxplot(self) -> dict[str, BoxplotSummary]:
        return {
            metric: summarize_boxplot([getattr(t, metric) for t in self.per_rep])
            for metric in ("precision", "recall", "f1")
        }

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "combination": self.combination,
            "per_rep": [t.to_dict() for t in self.per_rep],
            "mean": self.mean.to_dict(),
            "boxplot": {m: b.to_dict() for m, b in self.boxplot().items()},
        }


@dataclass
class EvalReport:
    meta: dict
    baseline: MetricTriple
    cells: list[CellResult]
    trees: dict[tuple[int, int, int], str] = field(default_factory=dict)

    def cell(self, family: str, combination: int) -> CellResult:
        for c in self.cells:
            if c.family == family and c.combination == combination:
                return c
        raise KeyError((family, combination))

    def to_dict(self) -> dict:
        return {
            "meta": self.meta,
            "baseline": self.baseline.to_dict(),
            "cells": [c.to_dict() for c in self.cells],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def metrics_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["family", "combination", "repetition", "metric", "value"])
        for c in self.cells:
            for rep, t in enumerate(c.per_rep):
                for metric in ("precision", "recall", "f1"):
                    writer.writerow([c.family, c.combination, rep, metric, repr(getattr(t, metric))])
        return buf.getvalue()


Trainer = Callable[[np.ndarray, np.ndarray, int], object]


@dataclass(frozen=True)
class _Task:
    family: str
    combination: int
    repetition: int


class CellError(RuntimeError):
    def __init__(self, task: _Task, cause: BaseException):
        super().__init__(
            f"{task.family} on combination {task.combination}, repetition {task.repetition}: "
            f"{type(cause).__name__}: {cause}"
        )
        self.task = task


_WORKER: dict = {}


def _init_worker(state):
    _WORKER.clear()
    _WORKER.update(state)


def _run_task(task: _Task):
    st = _WORKER
    data: FeatureMatrix = st["datasets"][task.combination]
    X = data.X.astype(float)
    y = data.y
    plan_seed = derive_seed(st["seed"], task.repetition, family_ordinal(task.family),
                            task.combination)
    plan = stratified_kfold(y, st["k"], plan_seed, task.repetition)
    trainer = st["trainers"].get(task.family)
    fold_metrics, trees = [], {}
    for fold in range(plan.k):
        train, test = plan.train_test(fold)
        if np.intersect1d(train, test).size:
            raise AssertionError("test rows leaked into the training slice")
        model_seed = derive_seed(plan_seed, fold + 1)
        try:
            if trainer is not None:
                model = trainer(X[train], y[train], model_seed)
            else:
                spec = models.ModelSpec(task.family, st["overrides"].get(task.family, {}),
                                        model_seed)
                model = models.train(spec, X[train], y[train], st["overrides"])
            predicted = model.predict(X[test])
        except Exception as exc:
            raise CellError(task, exc) from exc
        fold_metrics.append(compute_metrics(predicted, y[test]))
        if st["export_trees"] and isinstance(model, models.DecisionTree):
            trees[(task.combination, task.repetition, fold)] = model.to_dot(
                data.layout.columns,
                name=f"c{task.combination}_r{task.repetition}_f{fold}",
            )
    return task, mean_triple(fold_metrics), trees


def effective_specs(families, overrides) -> dict:
    out = {}
    for fam in families:
        if fam in models.DEFAULTS:
            out[fam] = models.ModelSpec(fam, overrides.get(fam, {})).params
            if fam == "voting":
                out[fam] = {**out[fam], "member_params": {
                    m: models.ModelSpec(m, overrides.get(m, {})).params for m in out[fam]["members"]
                }}
        else:
            out[fam] = {"custom": True}
    return out


def dataset_hash(datasets: Mapping[int, FeatureMatrix]) -> str:
    h = hashlib.sha256()
    for combo in sorted(datasets):
        h.update(f"{combo}:{datasets[combo].fingerprint()}".encode())
    return h.hexdigest()


def run_experiment(
    datasets: Mapping[int, FeatureMatrix],
    families: Sequence[str] = models.DEFAULT_FAMILIES,
    combinations: Sequence[int] | None = None,
    k: int = 5,
    repetitions: int = 10,
    seed: int = 0,
    overrides: Mapping[str, dict] | None = None,
    trainers: Mapping[str, Trainer] | None = None,
    jobs: int = 1,
    export_trees: bool = False,
) -> EvalReport:
    """Cross-validate every (family, combination) cell ``repetitions`` times.

    ``trainers`` maps a family name to ``f(X, y, seed) -> model`` and takes
    precedence over the built-in families (used for stubs). With
    ``jobs > 1`` cells run in worker processes; results do not depend on it.
    """
    combinations = sorted(datasets) if combinations is None else list(combinations)
    overrides = {fam: dict(p) for fam, p in (overrides or {}).items()}
    trainers = dict(trainers or {})
    for combo in combinations:
        if combo not in datasets:
            raise ValueError(f"no dataset for combination {combo}")
    for fam in families:
        if fam not in trainers and fam not in models.DEFAULTS:
            raise ValueError(f"unknown model family {fam!r}")
    labels = [datasets[c].y for c in combinations]
    if any(not np.array_equal(labels[0], other) for other in labels[1:]):
        raise ValueError("datasets for different combinations carry different labels")
    # fail on bad override keys before any training
    effective = effective_specs(families, overrides)

    state = {
        "datasets": {c: datasets[c] for c in combinations},
        "k": k,
        "seed": seed,
        "overrides": overrides,
        "trainers": trainers,
        "export_trees": export_trees,
    }
    tasks = [_Task(f, c, r) for f in families for c in combinations for r in range(repetitions)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker,
                                 initargs=(state,)) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=1))
    else:
        _init_worker(state)
        try:
            results = [_run_task(t) for t in tasks]
        finally:
            _WORKER.clear()

    by_cell: dict[tuple[str, int], list] = {}
    trees: dict = {}
    for task, triple, task_trees in results:
        by_cell.setdefault((task.family, task.combination), [None] * repetitions)[
            task.repetition] = triple
        trees.update(task_trees)
    cells = [CellResult(f, c, by_cell[(f, c)]) for f in families for c in combinations]

    y = labels[0] if labels else np.zeros(0, dtype=np.int64)
    baseline = compute_metrics(np.ones_like(y), y) if y.size else MetricTriple(0.0, 0.0, 0.0)
    meta = {
        "seed": seed,
        "k": k,
        "repetitions": repetitions,
        "dataset_hash": dataset_hash(state["datasets"]),
        "families": list(families),
        "combinations": list(combinations),
        "folds": "stratified",
        "aggregation": "fold-mean, then repetition-mean",
        "models": effective,
    }
    return EvalReport(meta, baseline, cells, dict(sorted(trees.items())))
