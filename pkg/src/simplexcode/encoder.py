"""Accelerated projected gradient encoder for simplex-constrained codes.

The encoder runs a fixed number ``T`` of accelerated steps

    x[t+1]  = P(xt[t] - alpha * grad(xt[t]))
    xt[t+1] = x[t+1] + gamma[t] * (x[t+1] - x[t])

starting from ``x[0] = xt[0] = 0`` and records every iterate together with
the projection's active set, so the exact same forward pass can be
differentiated afterwards (see :mod:`simplexcode.kds`).

Internally points are rows (``n x d``) and codes are rows (``n x m``). Every
operation acts on each row independently with a summation order that does not
depend on ``n``, so a batch encode agrees bit for bit with per-point encodes.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFiniteIterate
from .simplex import PenalizedLossParams, _project_rows

_ROW_CHUNK = 256


@dataclass(frozen=True)
class MomentumSchedule:
    """``etas[t]`` holds eta at step t+1; ``gammas[t]`` is the momentum after step t."""

    etas: np.ndarray
    gammas: np.ndarray


def momentum_schedule(T, literal=False):
    """Nesterov momentum weights for ``T`` steps.

    The default is the standard recurrence ``eta <- (1 + sqrt(1 + 4 eta^2)) / 2``
    from ``eta = 1`` with the first momentum weight fixed at zero.
    ``literal=True`` instead evaluates ``eta <- (1 + sqrt(1 + 4 eta)) / 2`` from
    ``eta = 0``; its first weight is -1, which cancels the first momentum step.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    if literal:
        etas = np.empty(T + 1)
        etas[0] = 0.0
        for t in range(T):
            etas[t + 1] = (1.0 + np.sqrt(1.0 + 4.0 * etas[t])) / 2.0
        gammas = (etas[:-1] - 1.0) / etas[1:]
        return MomentumSchedule(etas=etas, gammas=gammas)
    etas = np.empty(T + 1)
    etas[0] = 1.0
    for t in range(T):
        etas[t + 1] = (1.0 + np.sqrt(1.0 + 4.0 * etas[t] ** 2)) / 2.0
    gammas = np.zeros(T)
    gammas[1:] = (etas[: T - 1] - 1.0) / etas[1:T]
    return MomentumSchedule(etas=etas, gammas=gammas)


def lipschitz_constant(A, n_iter=100, tol=1e-10):
    """Largest eigenvalue of ``A^T A`` (i.e. sigma_max(A)^2) by power iteration."""
    A = np.asarray(A, dtype=float)
    M = A.T @ A if A.shape[1] <= A.shape[0] else A @ A.T
    v = np.ones(M.shape[0]) / np.sqrt(M.shape[0])
    lam = 0.0
    for _ in range(n_iter):
        w = M @ v
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return 0.0
        v = w / nrm
        new = float(v @ (M @ v))
        if abs(new - lam) <= tol * max(1.0, abs(new)):
            lam = new
            break
        lam = new
    return lam


def default_step_size(A):
    L = lipschitz_constant(A)
    return 0.99 / L if L > 0 else 1.0


@dataclass
class EncodeTrajectory:
    """Iterates of one encoder run.

    Arrays carry a leading time axis; for a single point ``iterates`` has shape
    ``(T+1, m)``, for a batch ``(T+1, n, m)``. ``active_sets[t]`` marks the
    coordinates surviving the projection that produced ``iterates[t+1]``.
    """

    iterates: np.ndarray
    momentum_iterates: np.ndarray
    active_sets: np.ndarray
    step_size: float
    gammas: np.ndarray
    lam: float

    @property
    def final(self):
        return self.iterates[-1]

    @property
    def depth(self):
        return len(self.active_sets)


def _sq_distances_rows(A, Yr):
    """``W[i, j] = ||y_i - a_j||^2`` for row points ``Yr`` (n x d)."""
    n = Yr.shape[0]
    W = np.empty((n, A.shape[1]))
    step = max(1, 4_000_000 // max(1, A.size))
    for s in range(0, n, step):
        diff = A.T[None, :, :] - Yr[s:s + step, None, :]  # (b, m, d)
        W[s:s + step] = np.sum(diff * diff, axis=2)
    return W


def _rowmat(Xr, M):
    """Row-wise ``x_i^T M`` computed as a stack of independent products.

    Both operands are made C-contiguous so the kernel choice, and with it the
    rounding, does not depend on how the caller sliced its arrays.
    """
    Xr = np.ascontiguousarray(Xr)
    M = np.ascontiguousarray(M)
    return (Xr[:, None, :] @ M)[:, 0, :]


def _forward_rows(A, Yr, lam, alpha, gammas, X0=None, keep=True):
    n = Yr.shape[0]
    m = A.shape[1]
    T = len(gammas)
    G = A.T @ A
    b = _rowmat(Yr, A)
    lw = lam * _sq_distances_rows(A, Yr)
    x = np.zeros((n, m)) if X0 is None else np.array(X0, dtype=float)
    xt = x.copy()
    if keep:
        xs = np.empty((T + 1, n, m))
        xts = np.empty((T + 1, n, m))
        masks = np.empty((T, n, m), dtype=bool)
        xs[0] = x
        xts[0] = xt
    for t in range(T):
        with np.errstate(over="ignore", invalid="ignore"):
            z = xt - alpha * (_rowmat(xt, G) - b + lw)
            x_new, mask = _project_rows(z)
        if not np.all(np.isfinite(x_new)):
            raise NonFiniteIterate(f"non-finite iterate at step {t + 1}; step size too large?")
        xt = x_new + gammas[t] * (x_new - x)
        x = x_new
        if keep:
            xs[t + 1] = x
            xts[t + 1] = xt
            masks[t] = mask
    if keep:
        return xs, xts, masks
    return x, None, None


def _resolve(A, params):
    alpha = params.step_size if params.step_size is not None else default_step_size(A)
    gammas = momentum_schedule(params.unroll_depth).gammas
    return float(alpha), gammas


_DEFAULT_PARAMS = PenalizedLossParams()


def encode(A, y, params=_DEFAULT_PARAMS, x0=None):
    """Encode a single point; returns the full :class:`EncodeTrajectory`.

    ``x0`` replaces the zero initialization (used for restart experiments).
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    if A.ndim != 2 or y.shape != (A.shape[0],):
        raise DimensionMismatch(f"dictionary {A.shape} and point {y.shape} disagree")
    alpha, gammas = _resolve(A, params)
    X0 = None if x0 is None else np.asarray(x0, dtype=float)[None, :]
    xs, xts, masks = _forward_rows(A, y[None, :], params.lam, alpha, gammas, X0)
    return EncodeTrajectory(
        iterates=xs[:, 0, :],
        momentum_iterates=xts[:, 0, :],
        active_sets=masks[:, 0, :],
        step_size=alpha,
        gammas=gammas,
        lam=float(params.lam),
    )


def batch_encode(A, Y, params=_DEFAULT_PARAMS, keep_trajectory=False):
    """Encode every column of ``Y`` (d x n).

    Returns ``(codes, trajectory)`` where ``codes`` is m x n and ``trajectory``
    is a batched :class:`EncodeTrajectory` (points on axis 1) when
    ``keep_trajectory`` is set, else ``None``.
    """
    A = np.asarray(A, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[0] != A.shape[0]:
        raise DimensionMismatch(f"dictionary {A.shape} and data {Y.shape} disagree")
    alpha, gammas = _resolve(A, params)
    Yr = Y.T
    if keep_trajectory:
        xs, xts, masks = _forward_rows(A, Yr, params.lam, alpha, gammas)
        traj = EncodeTrajectory(xs, xts, masks, alpha, gammas, float(params.lam))
        return xs[-1].T.copy(), traj
    codes = np.empty((A.shape[1], Y.shape[1]))
    for s in range(0, Yr.shape[0], _ROW_CHUNK):
        x, _, _ = _forward_rows(A, Yr[s:s + _ROW_CHUNK], params.lam, alpha, gammas, keep=False)
        codes[:, s:s + _ROW_CHUNK] = x.T
    return codes, None
