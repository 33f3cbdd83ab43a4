"""Orthonormal frames: polar factor, linear minimization, random sampling."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, NumericError

ORTHONORMALITY_TOL = 1e-10


def _as_matrix(G) -> np.ndarray:
    G = np.asarray(G, dtype=float)
    if G.ndim != 2:
        raise DimensionError(f"expected a 2-d array, got shape {G.shape}")
    p, k = G.shape
    if k > p:
        raise DimensionError(f"need k <= p for a frame, got {p}x{k}")
    if not np.all(np.isfinite(G)):
        raise NumericError("matrix contains non-finite entries")
    return G


def polar(G) -> np.ndarray:
    """Orthonormal factor Q of the polar decomposition G = QP.

    Computed from the thin SVD ``G = W diag(s) V^T`` as ``Q = W V^T``, which
    is well defined for rank-deficient ``G`` as well (Q is then one of
    several valid factors).

    Parameters
    ----------
    G : (p, k) array_like
        Matrix with ``k <= p`` and finite entries.

    Returns
    -------
    Q : (p, k) ndarray
        Matrix with orthonormal columns maximizing ``<G, Q>``.

    Raises
    ------
    DimensionError
        If ``G`` is not 2-d or has more columns than rows.
    NumericError
        If ``G`` contains NaN or inf.
    """
    G = _as_matrix(G)
    W, _, Vt = np.linalg.svd(G, full_matrices=False)
    return W @ Vt


def stiefel_min_linear(G) -> tuple[np.ndarray, float]:
    """Minimize ``<G, U>`` over frames; returns ``(-polar(G), -sum(sigma(G)))``."""
    G = _as_matrix(G)
    W, s, Vt = np.linalg.svd(G, full_matrices=False)
    return -(W @ Vt), -float(s.sum())


def random_frame(p: int, k: int, seed=None) -> np.ndarray:
    """Haar-distributed p x k frame.

    A Gaussian matrix is orthonormalized by QR and the columns are sign-fixed
    so that R has a positive diagonal; the result then does not depend on the
    LAPACK sign convention. ``seed`` is anything accepted by
    ``numpy.random.default_rng`` (including a ``Generator``).
    """
    if k < 1 or p < 1:
        raise DimensionError(f"need p, k >= 1, got p={p}, k={k}")
    if k > p:
        raise DimensionError(f"need k <= p for a frame, got p={p}, k={k}")
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((p, k))
    Q, R = np.linalg.qr(Z)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def orthonormality_error(U) -> float:
    """Frobenius norm of ``U^T U - I``."""
    U = np.asarray(U, dtype=float)
    return float(np.linalg.norm(U.T @ U - np.eye(U.shape[1])))


def is_frame(U, tol: float = ORTHONORMALITY_TOL) -> bool:
    U = np.asarray(U)
    return U.ndim == 2 and U.shape[1] <= U.shape[0] and orthonormality_error(U) <= tol
