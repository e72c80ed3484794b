"""Spectral clustering on code similarity graphs, k-means and matched accuracy."""

import warnings

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse.csgraph import connected_components

from ._parallel import pmap
from .errors import (
    DegenerateGraph,
    DegenerateGraphWarning,
    DimensionMismatch,
    LengthMismatch,
    NoConvergence,
    NotSymmetric,
)


def similarity_graph(codes, truncate=1e-12):
    """``W = C^T C`` with a zero diagonal; ``codes`` is m x n."""
    C = np.asarray(codes, dtype=float)
    if C.ndim != 2:
        raise DimensionMismatch("codes must be an m x n matrix")
    W = C.T @ C
    W = 0.5 * (W + W.T)
    np.fill_diagonal(W, 0.0)
    W[W < truncate] = 0.0
    return W


def symmetric_eigendecomposition(M, tol=1e-10, max_sweeps=100):
    """Cyclic Jacobi eigensolver.

    Sweeps rotate every off-diagonal pair in row order until the off-diagonal
    Frobenius norm falls below ``tol * ||M||_F``. Returns ascending
    eigenvalues and the matching orthonormal eigenvectors as columns.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotSymmetric("matrix must be square")
    scale = np.linalg.norm(M)
    if np.abs(M - M.T).max(initial=0.0) > 1e-10 * max(1.0, scale):
        raise NotSymmetric("matrix is not symmetric")
    n = M.shape[0]
    A = 0.5 * (M + M.T)
    V = np.eye(n)
    target = tol * scale
    for _ in range(max_sweeps):
        off = np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        off = np.sqrt(max(np.sum(A * A) - np.sum(np.diag(A) ** 2), 0.0))
        if off > target:
            raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    evals = np.diag(A).copy()
    order = np.argsort(evals, kind="stable")
    return evals[order], V[:, order]


def normalized_laplacian(W):
    """``I - D^{-1/2} W D^{-1/2}`` with degrees floored at 1e-12."""
    W = np.asarray(W, dtype=float)
    deg = np.maximum(W.sum(axis=1), 1e-12)
    inv = 1.0 / np.sqrt(deg)
    L = -(inv[:, None] * W * inv[None, :])
    L[np.diag_indices_from(L)] += 1.0
    return 0.5 * (L + L.T)


def spectral_embed(W, k, eigensolver="lapack", strict=False):
    """Ng-Jordan-Weiss embedding: bottom ``k`` eigenvectors of the normalized
    Laplacian, rows scaled to unit length.

    More than ``k`` connected components leave the embedding ill-posed; this
    emits :class:`DegenerateGraphWarning`, or raises :class:`DegenerateGraph`
    when ``strict``. ``eigensolver`` is ``"lapack"`` or ``"jacobi"``.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    W = np.asarray(W, dtype=float)
    n_comp, _ = connected_components(W != 0, directed=False)
    if n_comp > k:
        msg = f"similarity graph has {n_comp} connected components for k={k}"
        if strict:
            raise DegenerateGraph(msg)
        warnings.warn(msg, DegenerateGraphWarning, stacklevel=2)
    L = normalized_laplacian(W)
    if eigensolver == "jacobi":
        _, vecs = symmetric_eigendecomposition(L)
    elif eigensolver == "lapack":
        _, vecs = np.linalg.eigh(L)
    else:
        raise ValueError(f"unknown eigensolver {eigensolver!r}")
    U = vecs[:, :k]
    norms = np.linalg.norm(U, axis=1, keepdims=True)
    return U / np.where(norms > 0, norms, 1.0)


def _kmeanspp(X, k, rng):
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        i = rng.choice(n, p=d2 / total) if total > 0 else rng.integers(n)
        centers[j] = X[i]
        d2 = np.minimum(d2, np.sum((X - centers[j]) ** 2, axis=1))
    return centers


def _sq_dists(X, C):
    return np.sum(X * X, axis=1)[:, None] - 2.0 * X @ C.T + np.sum(C * C, axis=1)[None, :]


def _lloyd(X, k, seed, max_iter):
    rng = np.random.default_rng(seed)
    centers = _kmeanspp(X, k, rng)
    labels = None
    for _ in range(max_iter):
        D = _sq_dists(X, centers)
        new = np.argmin(D, axis=1)
        counts = np.bincount(new, minlength=k)
        for j in np.flatnonzero(counts == 0):
            # re-seed from the point farthest from its center
            far = int(np.argmax(D[np.arange(len(X)), new]))
            new[far] = j
            D[far] = 0.0
            counts = np.bincount(new, minlength=k)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(k):
            centers[j] = X[labels == j].mean(axis=0)
    inertia = float(np.sum((X - centers[labels]) ** 2))
    return inertia, labels


def kmeans(points, k, seed=0, n_init=10, max_iter=300):
    """Lloyd's algorithm with k-means++ seeding; best of ``n_init`` restarts.

    ``points`` is n x p (one point per row). Returns integer labels in [0, k).
    """
    X = np.asarray(points, dtype=float)
    if X.ndim != 2 or X.shape[0] < k:
        raise ValueError("need an n x p array with n >= k")
    seeds = np.random.SeedSequence(seed).spawn(n_init)
    runs = pmap(lambda s: _lloyd(X, k, s, max_iter), seeds)
    best = min(range(n_init), key=lambda i: runs[i][0])
    return runs[best][1]


def spectral_cluster(codes, k, seed=0, strict=False):
    W = similarity_graph(codes)
    return kmeans(spectral_embed(W, k, strict=strict), k, seed=seed)


def clustering_accuracy(pred, truth):
    """Best fraction of matches over label correspondences (Hungarian assignment)."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise LengthMismatch(f"{pred.shape} predictions for {truth.shape} labels")
    if pred.size == 0:
        return 1.0
    p_ids, p_inv = np.unique(pred, return_inverse=True)
    t_ids, t_inv = np.unique(truth, return_inverse=True)
    table = np.zeros((len(p_ids), len(t_ids)), dtype=np.int64)
    np.add.at(table, (p_inv, t_inv), 1)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum()) / pred.size
