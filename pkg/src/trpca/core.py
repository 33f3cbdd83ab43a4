"""Trimmed reconstruction error PCA (TRPCA).

Minimizes the mean of the ``t`` smallest squared distances from the rows of
``X`` to an affine subspace ``{m + U s}`` with ``U`` an orthonormal p x k
frame. The objective is concave in ``U`` for fixed ``m``, so each ``U`` step
minimizes a linear upper bound over the Stiefel manifold in closed form
(negative polar factor of a supergradient); each ``m`` step is the mean of
the currently retained rows. Both steps never increase the objective.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

import numpy as np

from .errors import DimensionError, NumericError
from .stiefel import polar, random_frame

CONVERGED = "converged"
MAX_ITER = "max_iter"
STALLED = "stalled"

DEFAULT_EPS = 1e-9
DEFAULT_MAX_ITER = 1000
DEFAULT_RESTARTS = 10


@dataclass
class SubspaceModel:
    """Affine subspace ``{center + basis @ s}``."""

    center: np.ndarray
    basis: np.ndarray

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        self.basis = np.asarray(self.basis, dtype=float)
        if self.basis.ndim != 2 or self.center.shape != (self.basis.shape[0],):
            raise DimensionError(
                f"center {self.center.shape} does not match basis {self.basis.shape}"
            )

    @property
    def p(self) -> int:
        return self.basis.shape[0]

    @property
    def k(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T


def default_t(n: int) -> int:
    """Default number of retained rows, ceil(n/2)."""
    return math.ceil(n / 2)


@dataclass(frozen=True)
class TrimmedObjectiveSpec:
    """Subspace dimension ``k`` and number of retained rows ``t``.

    ``t=None`` means ceil(n/2) once bound to a dataset of ``n`` rows.
    """

    k: int
    t: Optional[int] = None

    def bind(self, n: int, p: int) -> int:
        """Validate against an n x p dataset and return the concrete ``t``."""
        if not 1 <= self.k < p:
            raise DimensionError(f"need 1 <= k < p, got k={self.k}, p={p}")
        t = default_t(n) if self.t is None else int(self.t)
        if not default_t(n) <= t <= n:
            raise DimensionError(f"need ceil(n/2) <= t <= n, got t={t}, n={n}")
        return t


@dataclass
class TrimmedFitReport:
    model: SubspaceModel
    objective_trace: list
    selected_indices: np.ndarray
    iterations: int
    termination: str
    t: int
    seed: object = None
    restart: Optional[int] = None
    restart_objectives: list = field(default_factory=list)

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]


def _check_data(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionError(f"data must be 2-d, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise NumericError("data contains non-finite values")
    return X


def _check_model(X: np.ndarray, model: SubspaceModel):
    if model.p != X.shape[1]:
        raise DimensionError(f"model lives in R^{model.p}, data has {X.shape[1]} columns")


# rows per block in residual evaluation; keeps temporaries cache-sized
_BLOCK_ELEMS = 1 << 15


def _residuals_centered(Xc: np.ndarray, U: np.ndarray):
    """Squared distances of centered rows to span(U), plus the coordinates Xc @ U."""
    n, p = Xc.shape
    coords = Xc @ U
    r = np.empty(n)
    step = max(1, _BLOCK_ELEMS // p)
    for a in range(0, n, step):
        diff = Xc[a:a + step] - coords[a:a + step] @ U.T
        r[a:a + step] = np.einsum("ij,ij->i", diff, diff)
    return r, coords


def residuals(X, model: SubspaceModel) -> np.ndarray:
    """Squared distance of every row of ``X`` to the affine subspace.

    Evaluated as ``||x~ - U (U^T x~)||^2`` with ``x~ = x - m``; for a frame
    this equals ``||x~||^2 - ||U^T x~||^2`` but has no cancellation when the
    residual is tiny compared to ``||x~||^2``. Cost is O(pk) per row.
    """
    X = np.asarray(X, dtype=float)
    _check_model(X, model)
    r, _ = _residuals_centered(X - model.center, model.basis)
    return r


def reduced_residuals(X, center, U) -> np.ndarray:
    """``||x~||^2 - ||U^T x~||^2`` for an arbitrary p x k matrix ``U``.

    Coincides with :func:`residuals` only when ``U`` has orthonormal columns;
    off the manifold it may be negative.
    """
    Xc = np.asarray(X, dtype=float) - np.asarray(center, dtype=float)
    proj = Xc @ np.asarray(U, dtype=float)
    return np.einsum("ij,ij->i", Xc, Xc) - np.einsum("ij,ij->i", proj, proj)


def trimmed_objective(res, t: int, rng=None) -> tuple[float, np.ndarray]:
    """Mean of the ``t`` smallest residuals and their (sorted) row indices.

    Ties at the cut are broken by a random permutation drawn from ``rng``
    (a ``numpy.random.Generator``) before a stable sort; with ``rng=None``
    the lowest indices win.
    """
    res = np.asarray(res, dtype=float)
    n = res.shape[0]
    if not 1 <= t <= n:
        raise DimensionError(f"need 1 <= t <= n, got t={t}, n={n}")
    if rng is None:
        order = np.argsort(res, kind="stable")[:t]
    else:
        perm = rng.permutation(n)
        order = perm[np.argsort(res[perm], kind="stable")[:t]]
    idx = np.sort(order)
    return float(res[idx].mean()), idx


def reduced_objective(X, center, U, t: int) -> float:
    """Trimmed objective built from :func:`reduced_residuals`, defined for any U."""
    r = reduced_residuals(X, center, U)
    return float(np.sort(r)[:t].mean())


def supergradient(X, model: SubspaceModel, t: int, selection) -> np.ndarray:
    """Supergradient in ``U`` of the reduced trimmed objective at fixed center.

    Returns ``G = -(2/t) sum_{i in selection} x~_i x~_i^T U``, which carries
    the same ``1/t`` factor as the objective so that
    ``R(m, V) <= R(m, U) + <G, V - U>`` holds for every p x k matrix ``V``.
    """
    X = np.asarray(X, dtype=float)
    _check_model(X, model)
    selection = np.asarray(selection, dtype=int)
    if selection.shape != (t,):
        raise DimensionError(f"selection has {selection.size} entries, expected t={t}")
    Xs = X[selection] - model.center
    return _supergradient_from(Xs, Xs @ model.basis, t)


def _supergradient_from(Xs: np.ndarray, coords: np.ndarray, t: int) -> np.ndarray:
    return (-2.0 / t) * (Xs.T @ coords)


def _indicator(n: int, selection: np.ndarray) -> np.ndarray:
    w = np.zeros(n)
    w[selection] = 1.0
    return w


def update_basis(G, previous=None) -> np.ndarray:
    """Frame minimizing ``<G, U>``, i.e. ``-polar(G)``.

    If ``G`` is exactly zero every frame is a minimizer and ``previous`` is
    returned unchanged (when given).
    """
    G = np.asarray(G, dtype=float)
    if previous is not None and not np.any(G):
        return np.asarray(previous, dtype=float)
    return -polar(G)


def update_center(X, selection) -> np.ndarray:
    selection = np.asarray(selection, dtype=int)
    if selection.size == 0:
        raise DimensionError("cannot average an empty selection")
    return np.asarray(X, dtype=float)[selection].mean(axis=0)


def _relative_descent(prev: float, cur: float) -> float:
    return (prev - cur) / max(prev, 1e-12)


def trpca_fit(
    X,
    spec: TrimmedObjectiveSpec,
    init_basis=None,
    *,
    eps: float = DEFAULT_EPS,
    max_iter: int = DEFAULT_MAX_ITER,
    seed=None,
    init_center=None,
    callback=None,
) -> TrimmedFitReport:
    """Block-coordinate descent on the trimmed reconstruction error.

    Starts from the coordinate-wise median of ``X`` and ``init_basis`` (a
    random frame drawn from ``seed`` if omitted). Each iteration replaces the
    basis by ``-polar(G)`` for a supergradient ``G`` at the current center,
    then moves the center to the mean of the ``t`` rows with smallest
    residual under the new basis. Stops once the relative decrease of the
    objective drops below ``eps``.

    Parameters
    ----------
    X : (n, p) array_like
        Observations in rows.
    spec : TrimmedObjectiveSpec
        Subspace dimension and number of retained rows.
    init_basis : (p, k) array_like, optional
        Starting frame.
    eps : float
        Relative-descent tolerance.
    max_iter : int
        Iteration cap; ``termination`` is ``"max_iter"`` when hit.
    seed
        Seeds the tie-breaking generator (and the default starting frame).
    init_center : (p,) array_like, optional
        Starting center; defaults to the coordinate-wise median of ``X``.
    callback : callable, optional
        Called as ``callback(iteration, objective)`` after every accepted step.

    Returns
    -------
    TrimmedFitReport
        ``objective_trace[0]`` is the objective at the starting point and
        the trace never increases. If a step would raise the objective
        (possible only through rounding) it is discarded and the fit ends.
    """
    X = _check_data(X)
    n, p = X.shape
    t = spec.bind(n, p)
    rng = np.random.default_rng(seed)
    if init_basis is None:
        U = random_frame(p, spec.k, rng)
    else:
        U = np.asarray(init_basis, dtype=float)
        if U.shape != (p, spec.k):
            raise DimensionError(f"init_basis has shape {U.shape}, expected {(p, spec.k)}")

    if init_center is None:
        m = np.median(X, axis=0)
    else:
        m = np.asarray(init_center, dtype=float)
        if m.shape != (p,):
            raise DimensionError(f"init_center has shape {m.shape}, expected {(p,)}")
    Xc = X - m
    r, coords = _residuals_centered(Xc, U)
    obj, sel = trimmed_objective(r, t, rng)
    trace = [obj]

    termination = MAX_ITER
    iterations = 0
    for _ in range(max_iter):
        # masked product instead of gathering the t selected rows
        G = _supergradient_from(Xc, coords * _indicator(n, sel)[:, None], t)
        if not np.any(G):
            termination = STALLED
            break
        U_new = -polar(G)

        # center step: mean of the t best rows under the new basis
        r_mid, _ = _residuals_centered(Xc, U_new)
        _, sel_mid = trimmed_objective(r_mid, t, rng)
        m_new = (_indicator(n, sel_mid) @ X) / t

        np.subtract(X, m_new, out=Xc)
        r_new, coords = _residuals_centered(Xc, U_new)
        obj_new, sel_new = trimmed_objective(r_new, t, rng)
        if obj_new > obj:
            termination = CONVERGED
            break

        iterations += 1
        descent = _relative_descent(obj, obj_new)
        U, m, sel, obj = U_new, m_new, sel_new, obj_new
        trace.append(obj)
        if callback is not None:
            callback(iterations, obj)
        if descent < eps:
            termination = CONVERGED
            break

    return TrimmedFitReport(
        model=SubspaceModel(m, U),
        objective_trace=trace,
        selected_indices=sel,
        iterations=iterations,
        termination=termination,
        t=t,
        seed=seed,
    )


def restart_seeds(seed, restarts: int) -> list:
    """Per-restart ``(init_seed, fit_seed)`` pairs derived from ``seed``."""
    root = np.random.SeedSequence(seed)
    return [tuple(child.spawn(2)) for child in root.spawn(restarts)]


def elemental_start(X, rows) -> tuple[np.ndarray, np.ndarray]:
    """Center and frame of the affine subspace through ``k + 1`` given rows."""
    Y = np.asarray(X, dtype=float)[list(rows)]
    Q, _ = np.linalg.qr((Y[1:] - Y[0]).T)
    return Y.mean(axis=0), Q


def _elemental_subsets(n: int, k: int, seeds: list) -> list:
    """Distinct (k+1)-row subsets, one per restart after the first.

    All subsets are used (in order) when there are few enough; otherwise
    restart ``r`` draws from its own init seed, redrawing on repeats.
    Restarts left over after exhausting the subsets get ``None``.
    """
    count = len(seeds) - 1
    if math.comb(n, k + 1) <= count:
        subsets = list(combinations(range(n), k + 1))
        return subsets + [None] * (count - len(subsets))
    seen, subsets = set(), []
    for init_seed, _ in seeds[1:]:
        rng = np.random.default_rng(init_seed)
        for _ in range(100):
            rows = tuple(sorted(rng.choice(n, k + 1, replace=False).tolist()))
            if rows not in seen:
                break
        seen.add(rows)
        subsets.append(rows)
    return subsets


def trpca_multistart(
    X,
    spec: TrimmedObjectiveSpec,
    restarts: int = DEFAULT_RESTARTS,
    *,
    eps: float = DEFAULT_EPS,
    max_iter: int = DEFAULT_MAX_ITER,
    seed=None,
    init: str = "random",
    n_jobs: int = 1,
) -> TrimmedFitReport:
    """Run :func:`trpca_fit` from ``restarts`` starting points, keep the best.

    Restart ``r`` uses the seeds ``restart_seeds(seed, restarts)[r]``. With
    ``init="random"`` every restart starts from the median center and a
    random frame. With ``init="elemental"`` restart 0 does the same and the
    others start from the affine span of ``k + 1`` distinct randomly chosen
    rows, which explores far more basins on small or heavily trimmed
    problems.

    The winner is the smallest final objective, lowest restart index on
    ties, so ``n_jobs > 1`` (thread pool) returns the same report as serial
    runs.
    """
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    if init not in ("random", "elemental"):
        raise ValueError(f"init must be 'random' or 'elemental', got {init!r}")
    X = _check_data(X)
    n, p = X.shape
    spec.bind(n, p)
    seeds = restart_seeds(seed, restarts)
    subsets = [None] * restarts
    if init == "elemental":
        subsets[1:] = _elemental_subsets(n, spec.k, seeds)

    def run(r):
        init_seed, fit_seed = seeds[r]
        if subsets[r] is None:
            m0, U0 = None, random_frame(p, spec.k, init_seed)
        else:
            m0, U0 = elemental_start(X, subsets[r])
        return trpca_fit(X, spec, U0, eps=eps, max_iter=max_iter, seed=fit_seed, init_center=m0)

    if n_jobs > 1 and restarts > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            reports = list(pool.map(run, range(restarts)))
    else:
        reports = [run(r) for r in range(restarts)]

    objectives = [rep.objective for rep in reports]
    best = min(range(restarts), key=lambda i: (objectives[i], i))
    report = reports[best]
    report.restart = best
    report.restart_objectives = objectives
    report.seed = seed
    return report


def fit(
    X,
    k: int,
    t: Optional[int] = None,
    restarts: int = DEFAULT_RESTARTS,
    **kwargs,
) -> TrimmedFitReport:
    """Shorthand for ``trpca_multistart(X, TrimmedObjectiveSpec(k, t), restarts, ...)``."""
    return trpca_multistart(X, TrimmedObjectiveSpec(k, t), restarts, **kwargs)
