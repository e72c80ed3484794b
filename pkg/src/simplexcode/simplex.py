"""Simplex projection, locality-weighted sparsity metrics and the penalized loss.

A dictionary ``A`` is a ``d x m`` matrix whose columns ``a_j`` are atoms; a
code ``x`` is a length-``m`` vector on the probability simplex.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyInput, InfeasibleCode

SUPPORT_TOL = 1e-8
FEASIBILITY_TOL = 1e-10


@dataclass(frozen=True)
class PenalizedLossParams:
    """Locality weight, encoder step size and unroll depth.

    ``step_size=None`` means 0.99 / sigma_max(A)^2, resolved per dictionary.
    """

    lam: float = 1e-2
    step_size: float = None
    unroll_depth: int = 100

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError("lam must be nonnegative")
        if self.step_size is not None and not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if int(self.unroll_depth) != self.unroll_depth or self.unroll_depth < 1:
            raise ValueError("unroll_depth must be a positive integer")


def _project_rows(V):
    """Project each row of ``V`` onto the simplex; also return the active mask."""
    n, m = V.shape
    u = -np.sort(-V, axis=1)
    css = np.cumsum(u, axis=1)
    k = np.arange(1, m + 1, dtype=float)
    positive = u + (1.0 - css) / k > 0
    rho = m - 1 - np.argmax(positive[:, ::-1], axis=1)
    bias = (1.0 - css[np.arange(n), rho]) / (rho + 1.0)
    X = np.maximum(V + bias[:, None], 0.0)
    return X, X > 0


def project_simplex(v, axis=-1):
    """Euclidean projection onto the probability simplex.

    Sort-and-threshold: with ``u`` sorted in descending order, the bias is
    ``b = (1 - sum(u[:rho])) / rho`` for the largest ``rho`` keeping
    ``u[rho-1] + b > 0``, and the projection is ``max(v + b, 0)``. Arrays of
    higher rank are projected independently along ``axis``.
    """
    v = np.asarray(v, dtype=float)
    if v.size == 0 or v.shape[axis] == 0:
        raise EmptyInput("cannot project an empty vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("input must be finite")
    moved = np.moveaxis(v, axis, -1)
    flat = moved.reshape(-1, moved.shape[-1])
    X, _ = _project_rows(flat)
    return np.moveaxis(X.reshape(moved.shape), -1, axis)


def is_feasible(x, tol=FEASIBILITY_TOL):
    x = np.asarray(x, dtype=float)
    return bool(np.all(x >= -tol) and abs(x.sum() - 1.0) <= tol)


def _check(A, z, x=None):
    A = np.asarray(A, dtype=float)
    z = np.asarray(z, dtype=float)
    if A.ndim != 2 or z.shape != (A.shape[0],):
        raise DimensionMismatch(f"dictionary {A.shape} and point {z.shape} disagree")
    if x is not None:
        x = np.asarray(x, dtype=float)
        if x.shape != (A.shape[1],):
            raise DimensionMismatch(f"code of shape {x.shape} for {A.shape[1]} atoms")
    return A, z, x


def sq_distances(A, z):
    """Squared distances ``||z - a_j||^2`` to every atom."""
    A, z, _ = _check(A, z)
    diff = A - z[:, None]
    return np.sum(diff * diff, axis=0)


def weighted_l0(x, z, A, support_tol=SUPPORT_TOL):
    """Sum of squared atom distances over the support of ``x``."""
    A, z, x = _check(A, z, x)
    return float(np.sum(sq_distances(A, z)[x > support_tol]))


def weighted_l1(x, z, A):
    """``sum_j x_j ||z - a_j||^2``."""
    A, z, x = _check(A, z, x)
    return float(x @ sq_distances(A, z))


def weighted_l1_about(x, A, center):
    """Right-hand side of the center-shift identity.

    For ``y = A x`` with ``x`` on the simplex and any point ``c``,
    ``weighted_l1(x, y, A) == sum_j x_j ||a_j - c||^2 - ||y - c||^2``.
    With ``c`` a circumcenter the first term is constant over the cell, which
    is what makes the Delaunay cell optimal.
    """
    A, c, x = _check(A, center, x)
    y = A @ x
    return float(x @ sq_distances(A, c) - np.sum((y - c) ** 2))


def penalized_loss(A, y, x, lam):
    """``0.5 ||y - A x||^2 + lam * sum_j x_j ||y - a_j||^2`` for feasible ``x``."""
    A, y, x = _check(A, y, x)
    if not is_feasible(x):
        raise InfeasibleCode("code is not on the probability simplex")
    r = y - A @ x
    return float(0.5 * (r @ r) + lam * (x @ sq_distances(A, y)))


def loss_gradient_x(A, y, x, lam):
    """Gradient of the penalized loss in the code: ``A^T (A x - y) + lam * w``."""
    A, y, x = _check(A, y, x)
    return A.T @ (A @ x - y) + lam * sq_distances(A, y)
