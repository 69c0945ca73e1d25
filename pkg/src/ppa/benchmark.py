"""Experiment harness: relative-MSE dimensionality reduction and k-NN metrics.

Every run is seeded end to end, so identical inputs produce byte-identical
report files. The environment variable PPA_THREADS caps worker threads used
for benchmark repeats (0 = one per CPU; unset = sequential).
"""

from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial.distance import cdist

from .data import split
from .exceptions import InvalidDataError
from .geometry import whitened_variances
from .model import (
    FitConfig,
    GRADIENT_DESCENT,
    PCA_BASED,
    as_data_matrix,
    fit,
    transform,
    truncation_mse,
)

BENCHMARK_HEADER = "dataset,method,q,split,rel_mse_mean,rel_mse_std,repeats"
KNN_HEADER = "metric,k,n_train,accuracy_mean,accuracy_std"

METRICS = ("euclidean", "mahalanobis", "ppa-whitened")


def worker_count() -> int:
    """Thread cap from PPA_THREADS (0 = auto); defaults to sequential."""
    raw = os.environ.get("PPA_THREADS", "")
    if not raw:
        return 1
    count = int(raw)
    if count == 0:
        return os.cpu_count() or 1
    if count < 0:
        raise ValueError("PPA_THREADS must be >= 0")
    return count


@dataclass(frozen=True)
class BenchmarkReport:
    """Averaged relative-MSE table plus per-repeat bookkeeping.

    rows are dicts with keys matching the CSV schema; degrees maps method ->
    per-repeat lists of chosen stage degrees; fit_seconds maps method ->
    per-repeat wall-clock fit times.
    """

    dataset: str
    methods: tuple[str, ...]
    rows: tuple[dict, ...]
    repeats: int
    seeds: tuple[int, ...]
    degrees: dict
    fit_seconds: dict


def _method_config(method: str, config: FitConfig) -> FitConfig:
    if method == "pca":
        return replace(config, degree=1, strategy=PCA_BASED)
    if method == "ppa":
        return replace(config, strategy=PCA_BASED)
    if method == "ppa-gd":
        return replace(config, strategy=GRADIENT_DESCENT)
    raise ValueError(f"unknown benchmark method {method!r}")


def rel_mse_benchmark(
    X,
    config: FitConfig | None = None,
    repeats: int = 10,
    seed: int = 0,
    include_gd: bool = False,
    dataset: str = "data",
) -> BenchmarkReport:
    """Truncation MSE of each method relative to the PCA baseline.

    Per repeat: a seeded 50/50 column split, one fit per method on the train
    half, then truncation MSE for q = 1..d-1 on both halves, expressed as a
    percentage of PCA's MSE at the same q and split. Percentages average
    across repeats. The PCA row is identically 100 by construction.
    """
    X = as_data_matrix(X, min_dims=2)
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    config = config or FitConfig()
    methods = ("pca", "ppa", "ppa-gd") if include_gd else ("pca", "ppa")
    d = X.shape[0]
    qs = list(range(1, d))
    seeds = [int(s) for s in np.random.SeedSequence(seed).generate_state(repeats)]

    def one_repeat(rep_seed: int):
        train, test = split(X, 0.5, rep_seed)
        rel = {}
        degrees = {}
        seconds = {}
        mse = {}
        for method in methods:
            cfg = replace(_method_config(method, config), seed=rep_seed)
            started = time.perf_counter()
            mdl = fit(train, cfg)
            seconds[method] = time.perf_counter() - started
            degrees[method] = [s.degree for s in mdl.steps]
            mse[method] = {
                part: [truncation_mse(mdl, data_part, q) for q in qs]
                for part, data_part in (("train", train), ("test", test))
            }
        for method in methods:
            for part in ("train", "test"):
                vals = []
                for qi in range(len(qs)):
                    base = mse["pca"][part][qi]
                    own = mse[method][part][qi]
                    # divide first: the PCA-against-itself row is exactly 100
                    vals.append(100.0 if base == 0.0 else 100.0 * (own / base))
                rel[(method, part)] = vals
        return rel, degrees, seconds

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_repeat, seeds))
    else:
        results = [one_repeat(s) for s in seeds]

    rows = []
    for method in methods:
        for part in ("train", "test"):
            stacked = np.array([res[0][(method, part)] for res in results])
            for qi, q in enumerate(qs):
                rows.append(
                    {
                        "dataset": dataset,
                        "method": method,
                        "q": q,
                        "split": part,
                        "rel_mse_mean": float(stacked[:, qi].mean()),
                        "rel_mse_std": float(stacked[:, qi].std()),
                        "repeats": repeats,
                    }
                )
    degrees = {m: [res[1][m] for res in results] for m in methods}
    seconds = {m: [res[2][m] for res in results] for m in methods}
    return BenchmarkReport(
        dataset=dataset,
        methods=methods,
        rows=tuple(rows),
        repeats=repeats,
        seeds=tuple(seeds),
        degrees=degrees,
        fit_seconds=seconds,
    )


def write_benchmark_csv(report: BenchmarkReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BENCHMARK_HEADER.split(","))
        for row in report.rows:
            writer.writerow(
                [
                    row["dataset"],
                    row["method"],
                    row["q"],
                    row["split"],
                    repr(row["rel_mse_mean"]),
                    repr(row["rel_mse_std"]),
                    row["repeats"],
                ]
            )


# ---------------------------------------------------------------------------
# k-NN under three metrics
# ---------------------------------------------------------------------------


def _whiten_for_metric(metric: str, train_x, fit_config: FitConfig):
    """Return a map applying the metric's whitening to d x n matrices."""
    if metric == "euclidean":
        return lambda Z: Z
    if metric == "mahalanobis":
        mean = train_x.mean(axis=1, keepdims=True)
        cov = np.cov(train_x, bias=True)
        eigvals, eigvecs = np.linalg.eigh(cov)
        eigvals = np.maximum(eigvals, 1e-12 * max(eigvals.max(), 1e-30))
        scale = eigvecs / np.sqrt(eigvals)
        return lambda Z: scale.T @ (Z - mean)
    if metric == "ppa-whitened":
        mdl = fit(train_x, fit_config)
        sigma = np.sqrt(whitened_variances(mdl, train_x))
        return lambda Z: transform(mdl, Z) / sigma[:, None]
    raise ValueError(f"unknown metric {metric!r}; pick from {METRICS}")


def knn_classify(
    train_x,
    train_y,
    test_x,
    test_y,
    k: int,
    metric: str = "euclidean",
    fit_config: FitConfig | None = None,
) -> float:
    """k-NN accuracy under the chosen metric.

    euclidean: raw input-space distance. mahalanobis: Euclidean after linear
    whitening with the pooled training covariance. ppa-whitened: a single
    model is fitted on the pooled (unlabeled) training data, samples are
    transformed and divided by the training-set standard deviation of each
    response coordinate, then Euclidean. Vote ties break to the nearest
    neighbor's label.
    """
    train_x = as_data_matrix(train_x)
    test_x = as_data_matrix(test_x, min_samples=1)
    train_y = np.asarray(train_y)
    test_y = np.asarray(test_y)
    n_train = train_x.shape[1]
    if train_y.shape[0] != n_train or test_y.shape[0] != test_x.shape[1]:
        raise InvalidDataError("label count does not match sample count")
    if not 1 <= k <= n_train:
        raise ValueError(f"k must be in [1, {n_train}], got {k}")

    whiten = _whiten_for_metric(metric, train_x, fit_config or FitConfig())
    wtrain = whiten(train_x)
    wtest = whiten(test_x)
    dists = cdist(wtest.T, wtrain.T)
    neighbor_idx = np.argsort(dists, axis=1)[:, :k]

    correct = 0
    for i in range(test_x.shape[1]):
        votes = train_y[neighbor_idx[i]]
        labels, counts = np.unique(votes, return_counts=True)
        winners = labels[counts == counts.max()]
        pred = winners[0] if winners.size == 1 else votes[0]
        correct += pred == test_y[i]
    return correct / test_x.shape[1]


def knn_benchmark(
    X,
    y,
    train_per_class: int,
    ks,
    metrics=METRICS,
    repeats: int = 10,
    seed: int = 0,
    fit_config: FitConfig | None = None,
) -> list[dict]:
    """Repeated subsampled k-NN runs; rows match the knn report CSV schema."""
    X = as_data_matrix(X)
    y = np.asarray(y)
    if y.shape[0] != X.shape[1]:
        raise InvalidDataError("label count does not match sample count")
    classes = np.unique(y)
    seeds = np.random.SeedSequence(seed).generate_state(repeats)

    accs = {(m, k): [] for m in metrics for k in ks}
    n_train_total = train_per_class * classes.size
    for rep_seed in seeds:
        rng = np.random.default_rng(int(rep_seed))
        train_idx = []
        for cls in classes:
            members = np.flatnonzero(y == cls)
            if members.size <= train_per_class:
                raise InvalidDataError(
                    f"class {cls!r} has only {members.size} samples; "
                    f"need more than {train_per_class}"
                )
            train_idx.extend(rng.choice(members, train_per_class, replace=False))
        train_mask = np.zeros(y.shape[0], dtype=bool)
        train_mask[train_idx] = True
        cfg = replace(fit_config or FitConfig(), seed=int(rep_seed))
        for metric in metrics:
            for k in ks:
                accs[(metric, k)].append(
                    knn_classify(
                        X[:, train_mask],
                        y[train_mask],
                        X[:, ~train_mask],
                        y[~train_mask],
                        k,
                        metric,
                        cfg,
                    )
                )

    rows = []
    for metric in metrics:
        for k in ks:
            vals = np.array(accs[(metric, k)])
            rows.append(
                {
                    "metric": metric,
                    "k": k,
                    "n_train": n_train_total,
                    "accuracy_mean": float(vals.mean()),
                    "accuracy_std": float(vals.std()),
                }
            )
    return rows


def write_knn_csv(rows, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(KNN_HEADER.split(","))
        for row in rows:
            writer.writerow(
                [
                    row["metric"],
                    row["k"],
                    row["n_train"],
                    repr(row["accuracy_mean"]),
                    repr(row["accuracy_std"]),
                ]
            )
