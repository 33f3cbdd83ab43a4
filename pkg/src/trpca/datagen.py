"""Synthetic contaminated datasets.

Two generators follow the usual robust-PCA benchmark setup: true rows
``A U^T + E`` with ``A`` uniform on [-1, 1] and Gaussian noise ``E``, plus
either uniform-box outliers (``data1``) or half-space outliers (``data2``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionError
from .stiefel import random_frame


@dataclass(frozen=True)
class GeneratorParams:
    n: int = 200
    p: int = 100
    k: int = 5
    sigma_T: float = 0.05
    sigma_o: float = 2.0
    lam: float = 0.3
    seed: Optional[int] = None

    def validate(self):
        if not 0.0 <= self.lam < 0.5:
            raise DimensionError(f"outlier fraction must lie in [0, 0.5), got {self.lam}")
        if self.n < 1 or self.p < 1 or not 1 <= self.k <= self.p:
            raise DimensionError(f"invalid sizes n={self.n}, p={self.p}, k={self.k}")
        if self.sigma_T < 0 or self.sigma_o < 0:
            raise DimensionError("noise scales must be non-negative")

    def split(self) -> tuple[int, int]:
        """``(t, o)`` with ``o = floor(lam * n)``."""
        o = math.floor(self.lam * self.n)
        return self.n - o, o


@dataclass
class DatasetTruth:
    t_true: int
    m_true: Optional[np.ndarray] = None
    U_true: Optional[np.ndarray] = None


@dataclass
class ContaminatedDataset:
    X: np.ndarray
    labels: np.ndarray
    truth: DatasetTruth
    provenance: dict = field(default_factory=dict)

    @property
    def true_rows(self) -> np.ndarray:
        return self.X[self.labels]

    @property
    def outlier_rows(self) -> np.ndarray:
        return self.X[~self.labels]

    @property
    def n(self) -> int:
        return self.X.shape[0]


def _shuffle(T: np.ndarray, O: np.ndarray, rng: np.random.Generator):
    X = np.vstack([T, O])
    labels = np.concatenate([np.ones(len(T), bool), np.zeros(len(O), bool)])
    perm = rng.permutation(len(X))
    return X[perm], labels[perm]


def _true_block(params: GeneratorParams, t: int, rng: np.random.Generator):
    U = random_frame(params.p, params.k, rng)
    A = rng.uniform(-1.0, 1.0, size=(t, params.k))
    E = rng.normal(0.0, params.sigma_T, size=(t, params.p))
    return A @ U.T + E, U


def gen_data1(params: GeneratorParams) -> ContaminatedDataset:
    """True rows plus outliers drawn uniformly from the box ``[0, sigma_o]^p``."""
    params.validate()
    rng = np.random.default_rng(params.seed)
    t, o = params.split()
    T, U = _true_block(params, t, rng)
    O = rng.uniform(0.0, params.sigma_o, size=(o, params.p))
    X, labels = _shuffle(T, O, rng)
    return ContaminatedDataset(
        X=X,
        labels=labels,
        truth=DatasetTruth(t_true=t, m_true=np.zeros(params.p), U_true=U),
        provenance={"generator": "data1", "t": t, "o": o, **asdict(params)},
    )


def halfspace_outliers(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Remove the positive part of each row's component along unit vector ``w``."""
    proj = np.maximum(x @ w, 0.0)
    return x - proj[:, None] * w[None, :]


def gen_data2(params: GeneratorParams) -> ContaminatedDataset:
    """Half-space outliers; true block is ``0.5 * (A U^T + E)``.

    ``w`` is uniform on the unit sphere, ``x ~ N(0, sigma_o^2 I)`` and each
    outlier is ``x - max(<x, w>, 0) w``. The 0.5 factor is applied after the
    noise is added.
    """
    params.validate()
    rng = np.random.default_rng(params.seed)
    t, o = params.split()
    T, U = _true_block(params, t, rng)
    T = 0.5 * T
    w = rng.standard_normal(params.p)
    w /= np.linalg.norm(w)
    O = halfspace_outliers(rng.normal(0.0, params.sigma_o, size=(o, params.p)), w)
    X, labels = _shuffle(T, O, rng)
    return ContaminatedDataset(
        X=X,
        labels=labels,
        truth=DatasetTruth(t_true=t, m_true=np.zeros(params.p), U_true=U),
        provenance={
            "generator": "data2",
            "t": t,
            "o": o,
            "true_scale": 0.5,
            "scale_order": "after_noise",
            "halfspace_normal": w.tolist(),
            **asdict(params),
        },
    )


GENERATORS = {"data1": gen_data1, "data2": gen_data2}


def mix(T, O, seed=None) -> ContaminatedDataset:
    """Shuffle user-supplied true rows ``T`` and outliers ``O`` into one dataset."""
    T = np.atleast_2d(np.asarray(T, dtype=float))
    O = np.asarray(O, dtype=float)
    if O.size == 0:
        O = np.empty((0, T.shape[1]))
    O = np.atleast_2d(O)
    if T.shape[1] != O.shape[1]:
        raise DimensionError(f"column mismatch: T has {T.shape[1]}, O has {O.shape[1]}")
    if len(T) < len(O):
        warnings.warn(
            f"fewer true rows ({len(T)}) than outliers ({len(O)}); "
            "trimmed estimators cannot separate them",
            stacklevel=2,
        )
    rng = np.random.default_rng(seed)
    X, labels = _shuffle(T, O, rng)
    return ContaminatedDataset(
        X=X,
        labels=labels,
        truth=DatasetTruth(t_true=len(T)),
        provenance={"generator": "mix", "t": len(T), "o": len(O), "seed": seed},
    )
