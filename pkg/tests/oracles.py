"""Independent reference computations used only by the tests."""

import itertools

import numpy as np


def singular_values(G):
    """Singular values of a p x k matrix (k <= p) without an SVD.

    Eigenvalues of the symmetric matrix [[0, G], [G^T, 0]] are +-sigma_i
    (plus p - k zeros); the k largest are the singular values, accurate to
    eps * ||G|| in absolute terms.
    """
    G = np.asarray(G, dtype=float)
    p, k = G.shape
    J = np.zeros((p + k, p + k))
    J[:p, p:] = G
    J[p:, :p] = G.T
    return np.clip(np.linalg.eigvalsh(J)[::-1][:k], 0.0, None)


def inv_sqrt_polar(G):
    """G (G^T G)^{-1/2} for full-rank G."""
    ev, V = np.linalg.eigh(G.T @ G)
    return G @ (V @ np.diag(ev ** -0.5) @ V.T)


def brute_force_trim(res, t):
    """Minimum mean over all t-subsets, and every subset attaining it."""
    res = list(res)
    best, arg = np.inf, []
    for S in itertools.combinations(range(len(res)), t):
        v = sum(res[i] for i in S) / t
        if v < best - 1e-15:
            best, arg = v, [set(S)]
        elif abs(v - best) <= 1e-15:
            arg.append(set(S))
    return best, arg


def projector_residuals(X, m, U):
    """||(U U^T - I)(x - m)||^2 with the explicit p x p projector."""
    P = U @ U.T - np.eye(U.shape[0])
    D = (X - m) @ P.T
    return np.sum(D * D, axis=1)


def best_trimmed_pca_value(X, t, k):
    """Global optimum of the trimmed objective by exhaustive subset search."""
    best = np.inf
    for S in itertools.combinations(range(len(X)), t):
        Y = X[list(S)]
        Yc = Y - Y.mean(axis=0)
        ev = np.linalg.eigvalsh(Yc.T @ Yc / t)
        best = min(best, ev[: len(ev) - k].sum())
    return best
