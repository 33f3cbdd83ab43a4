"""Standard PCA baseline and the ground-truth PCA of the uncontaminated rows."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SubspaceModel, _check_data
from .errors import DimensionError


@dataclass
class PcaModel(SubspaceModel):
    """Affine PCA fit; ``spectrum`` holds the top-k covariance eigenvalues (1/n normalized)."""

    spectrum: np.ndarray = None
    total_variance: float = 0.0

    def reconstruction_error(self) -> float:
        """Mean squared reconstruction error on the fitted data."""
        return max(self.total_variance - float(self.spectrum.sum()), 0.0)


def _fix_signs(V: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    # first entry of non-negligible magnitude in each column made positive
    V = V.copy()
    for j in range(V.shape[1]):
        col = V[:, j]
        nz = np.flatnonzero(np.abs(col) > tol * max(np.abs(col).max(), 1.0))
        if nz.size and col[nz[0]] < 0:
            V[:, j] = -col
    return V


def pca_fit(X, k: int) -> PcaModel:
    """Mean-centered PCA with k components.

    The basis comes from the thin SVD of the centered data, which yields the
    eigenvectors of ``C = Xc^T Xc / n`` without forming the p x p matrix.
    Eigenvalues are returned in non-increasing order; each basis vector is
    sign-normalized so its first non-negligible entry is positive.
    """
    X = _check_data(X)
    n, p = X.shape
    if n < 2:
        raise DimensionError(f"need at least 2 rows, got {n}")
    if not 1 <= k < p:
        raise DimensionError(f"need 1 <= k < p, got k={k}, p={p}")
    center = X.mean(axis=0)
    Xc = X - center
    _, s, Vt = np.linalg.svd(Xc, full_matrices=False)
    eig = s**2 / n
    if Vt.shape[0] < k:
        # n - 1 < k: pad with an orthonormal complement, eigenvalue 0
        Q, _ = np.linalg.qr(np.hstack([Vt.T, np.eye(p)]))
        Vt = np.vstack([Vt, Q[:, Vt.shape[0]:k].T])
        eig = np.concatenate([eig, np.zeros(k - eig.size)])
    basis = _fix_signs(Vt[:k].T)
    return PcaModel(
        center=center,
        basis=basis,
        spectrum=eig[:k].copy(),
        total_variance=float(np.einsum("ij,ij->", Xc, Xc) / n),
    )


def true_pca(dataset, k: int) -> PcaModel:
    """PCA of the rows labelled as true data in a :class:`ContaminatedDataset`."""
    return pca_fit(dataset.true_rows, k)
