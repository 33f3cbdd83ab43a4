"""Per-iteration timing of the TRPCA descent loop."""

from __future__ import annotations

import time

import numpy as np

from .core import TrimmedObjectiveSpec, trpca_fit
from .stiefel import random_frame


def iteration_times(X, k: int, t=None, iterations: int = 15, seed=0) -> np.ndarray:
    """Wall-clock seconds between consecutive accepted descent steps.

    Runs with ``eps=0`` so only ``iterations`` (or a rounding-level stall)
    ends the loop. Setup work before the first step is excluded.
    """
    X = np.asarray(X, dtype=float)
    stamps = []
    U0 = random_frame(X.shape[1], k, seed)
    trpca_fit(
        X,
        TrimmedObjectiveSpec(k, t),
        U0,
        eps=0.0,
        max_iter=iterations + 1,
        seed=seed,
        callback=lambda _it, _obj: stamps.append(time.perf_counter()),
    )
    return np.diff(np.array(stamps))


def median_iteration_time(n: int, p: int, k: int = 5, iterations: int = 15, seed: int = 0) -> float:
    """Median step time on an n x p standard Gaussian matrix."""
    X = np.random.default_rng(seed).standard_normal((n, p))
    times = iteration_times(X, k, iterations=iterations, seed=seed)
    if times.size == 0:
        raise RuntimeError("no completed iterations to time")
    return float(np.median(times))
