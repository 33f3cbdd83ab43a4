"""Metrics, contamination sweeps and background/foreground splitting."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .core import SubspaceModel, TrimmedObjectiveSpec, _check_model, residuals, trpca_multistart
from .datagen import GENERATORS, ContaminatedDataset, GeneratorParams
from .errors import DimensionError
from .pca import PcaModel, pca_fit, true_pca

METHODS = ("trpca", "trpca_default_t", "pca")
DEFAULT_REPS = 5


def tre(model: SubspaceModel, dataset: ContaminatedDataset, oracle: PcaModel) -> float:
    """Excess mean reconstruction error on the true rows over the true-PCA oracle.

    ``(1/|T|) sum_{i in T} [r_i(model) - r_i(oracle)]``. The raw value is
    returned; it can dip below zero by rounding only.
    """
    if model.k != oracle.k:
        raise DimensionError(f"model has k={model.k}, oracle has k={oracle.k}")
    T = dataset.true_rows
    return float(np.mean(residuals(T, model) - residuals(T, oracle)))


def principal_angles(A, B) -> np.ndarray:
    """Principal angles (ascending) between span(A) and span(B), in [0, pi/2]."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise DimensionError(f"frames differ in shape: {A.shape} vs {B.shape}")
    s = np.linalg.svd(A.T @ B, compute_uv=False)
    return np.arccos(np.clip(s, 0.0, 1.0))


@dataclass
class SweepRow:
    lam: float
    method: str
    mean_tre: float
    std_tre: float
    runs: int
    values: list = field(default_factory=list)


@dataclass
class SweepResult:
    rows: list
    config: dict

    def cell(self, lam: float, method: str) -> SweepRow:
        for row in self.rows:
            if row.method == method and np.isclose(row.lam, lam):
                return row
        raise KeyError((lam, method))


def _fit_method(method: str, dataset: ContaminatedDataset, k: int, seed, **opts):
    if method == "pca":
        return pca_fit(dataset.X, k)
    t = dataset.truth.t_true if method == "trpca" else None
    return trpca_multistart(dataset.X, TrimmedObjectiveSpec(k, t), seed=seed, **opts).model


def run_sweep(
    generator: str,
    base: GeneratorParams,
    lambdas: Iterable[float],
    methods: Sequence[str] = METHODS,
    reps: int = DEFAULT_REPS,
    seed: int = 0,
    *,
    restarts: int = 10,
    eps: float = 1e-9,
    max_iter: int = 1000,
    init: str = "random",
    n_jobs: int = 1,
) -> SweepResult:
    """Mean and std of tre per (lambda, method) over ``reps`` sampled datasets.

    Dataset ``r`` at grid position ``j`` is seeded by ``(seed, j, r)`` and
    shared by all methods, so results depend only on ``seed``. Cells run in
    a thread pool when ``n_jobs > 1``; output keeps grid order.
    """
    if generator not in GENERATORS:
        raise ValueError(f"unknown generator {generator!r}; choose from {sorted(GENERATORS)}")
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ValueError(f"unknown methods {sorted(unknown)}")
    if reps < 1:
        raise ValueError("reps must be >= 1")
    lambdas = [float(lam) for lam in lambdas]
    gen = GENERATORS[generator]
    opts = dict(restarts=restarts, eps=eps, max_iter=max_iter, init=init)

    def cell(job):
        j, r = job
        ss = np.random.SeedSequence([seed, j, r])
        data_seed, fit_seed = (int(s.generate_state(1)[0]) for s in ss.spawn(2))
        dataset = gen(replace(base, lam=lambdas[j], seed=data_seed))
        oracle = true_pca(dataset, base.k)
        return [
            tre(_fit_method(m, dataset, base.k, fit_seed, **opts), dataset, oracle)
            for m in methods
        ]

    jobs = [(j, r) for j in range(len(lambdas)) for r in range(reps)]
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(cell, jobs))
    else:
        results = [cell(job) for job in jobs]

    rows = []
    for j, lam in enumerate(lambdas):
        block = np.array(results[j * reps:(j + 1) * reps])
        for mi, method in enumerate(methods):
            vals = block[:, mi]
            rows.append(SweepRow(lam, method, float(vals.mean()), float(vals.std()), reps, vals.tolist()))

    config = {
        "generator": generator,
        "params": asdict(base),
        "lambdas": lambdas,
        "methods": list(methods),
        "reps": reps,
        "seed": seed,
        "restarts": restarts,
        "eps": eps,
        "max_iter": max_iter,
        "init": init,
    }
    return SweepResult(rows, config)


@dataclass
class BackgroundSplit:
    background: np.ndarray
    foreground: np.ndarray
    frame_errors: np.ndarray


def split_background(X, model: SubspaceModel) -> BackgroundSplit:
    """Project each frame onto the model: background ``m + U U^T (x - m)``, foreground the rest."""
    X = np.asarray(X, dtype=float)
    _check_model(X, model)
    U = model.basis
    background = model.center + ((X - model.center) @ U) @ U.T
    foreground = X - background
    errors = np.einsum("ij,ij->i", foreground, foreground)
    return BackgroundSplit(background, foreground, errors)
