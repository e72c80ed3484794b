"""Dictionary learning by backpropagation through the unrolled encoder (KDS).

The encoder of :mod:`simplexcode.encoder` is a weight-tied recurrent network
whose only weights are the atoms. Its forward pass is a composition of affine
maps and simplex projections; on a fixed active set the projection is the
linear map ``J = I_A - 1_A 1_A^T / |A|``, so the exact reverse-mode gradient
of the loss at the encoder output follows by replaying the recorded
trajectory backwards.
"""

import logging
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _io
from .encoder import (
    _forward_rows,
    _sq_distances_rows,
    batch_encode,
    default_step_size,
    encode,
    momentum_schedule,
)
from .errors import (
    DimensionMismatch,
    InsufficientData,
    NonFiniteIterate,
    NonFiniteLoss,
    TrajectoryMismatch,
)
from .simplex import PenalizedLossParams

logger = logging.getLogger(__name__)


# Locality weights used when a config leaves lam unset. The synthetic value is
# large enough that the two-moons tips stay on their own arc.
SYNTHETIC_LAMBDA = 0.5
IMAGE_LAMBDA = 0.1


@dataclass(frozen=True)
class TrainConfig:
    lam: float = SYNTHETIC_LAMBDA
    unroll_depth: int = 100
    step_size: object = "auto"
    epochs: int = 200
    batch_size: int = 128
    learning_rate: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValueError("lam must be nonnegative")
        if int(self.unroll_depth) != self.unroll_depth or self.unroll_depth < 1:
            raise ValueError("unroll_depth must be a positive integer")
        if self.step_size != "auto" and not (
            isinstance(self.step_size, (int, float)) and self.step_size > 0
        ):
            raise ValueError("step_size must be 'auto' or a positive number")
        if int(self.epochs) != self.epochs or self.epochs < 1:
            raise ValueError("epochs must be a positive integer")
        if int(self.batch_size) != self.batch_size or self.batch_size < 1:
            raise ValueError("batch_size must be a positive integer")
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be nonnegative")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def encoder_params(self):
        step = None if self.step_size == "auto" else float(self.step_size)
        return PenalizedLossParams(lam=self.lam, step_size=step, unroll_depth=self.unroll_depth)


@dataclass
class TrainReport:
    dictionary: np.ndarray
    codes: np.ndarray
    loss_history: list
    config: TrainConfig
    extra: dict = field(default_factory=dict)

    def atom_usage(self):
        """Mean code weight carried by each atom."""
        return self.codes.mean(axis=1)

    def to_json(self):
        return {
            "config": asdict(self.config),
            "loss_history": [float(v) for v in self.loss_history],
            "n_atoms": int(self.dictionary.shape[1]),
            "dim": int(self.dictionary.shape[0]),
            "n_points": int(self.codes.shape[1]),
            "atom_usage": [float(u) for u in self.atom_usage()],
            **self.extra,
        }

    def save(self, out_dir):
        """Write atoms.csv, codes.csv, loss_history.csv and report.json."""
        os.makedirs(out_dir, exist_ok=True)
        _io.write_rows_csv(os.path.join(out_dir, "atoms.csv"), self.dictionary.T)
        _io.write_rows_csv(os.path.join(out_dir, "codes.csv"), self.codes.T)
        _io.write_rows_csv(
            os.path.join(out_dir, "loss_history.csv"),
            np.asarray(self.loss_history, dtype=float)[:, None],
        )
        _io.write_json(os.path.join(out_dir, "report.json"), self.to_json())


def reconstruct(A, x):
    """Decoder: ``A @ x``."""
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    if A.ndim != 2 or x.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"dictionary {A.shape} and code {x.shape} disagree")
    return A @ x


def init_dictionary(Y, m, seed=0):
    """Pick ``m`` distinct data columns and jitter them by 1e-3 of the data std."""
    Y = np.asarray(Y, dtype=float)
    n = Y.shape[1]
    if n < m:
        raise InsufficientData(f"need at least m={m} points, got {n}")
    rng = np.random.default_rng(seed)
    cols = rng.choice(n, size=m, replace=False)
    scale = 1e-3 * float(np.std(Y))
    return Y[:, cols] + scale * rng.standard_normal((Y.shape[0], m))


def _loss_rows(A, Yr, X, lam):
    R = X @ A.T - Yr
    return 0.5 * np.sum(R * R, axis=1) + lam * np.sum(X * _sq_distances_rows(A, Yr), axis=1)


def _backward_rows(A, Yr, xs, xts, masks, lam, alpha, gammas):
    """Summed gradient wrt ``A`` of the loss at the encoder output, and per-point losses."""
    G = A.T @ A
    b = Yr @ A
    W = _sq_distances_rows(A, Yr)
    x = xs[-1]
    R = x @ A.T - Yr
    losses = 0.5 * np.sum(R * R, axis=1) + lam * np.sum(x * W, axis=1)

    grad = R.T @ x  # reconstruction term, direct
    xbar = x @ G - b + lam * W  # dL/dx at the output
    wbar = lam * x
    bbar = np.zeros_like(x)
    Gbar = np.zeros_like(G)
    xtbar = np.zeros_like(x)
    for t in range(len(gammas) - 1, -1, -1):
        g = gammas[t]
        xbar_out = xbar + (1.0 + g) * xtbar
        xbar = -g * xtbar
        mk = masks[t]
        zbar = np.where(mk, xbar_out, 0.0)
        zbar -= mk * (zbar.sum(axis=1) / mk.sum(axis=1))[:, None]
        Gbar -= alpha * (zbar.T @ xts[t])
        bbar += alpha * zbar
        wbar -= alpha * lam * zbar
        xtbar = zbar - alpha * (zbar @ G)

    grad += A @ (Gbar + Gbar.T)
    grad += Yr.T @ bbar
    grad += 2.0 * (A * wbar.sum(axis=0) - Yr.T @ wbar)
    return grad, losses


def loss_gradient_A(A, y, traj, lam):
    """Exact gradient of ``L(A, y, x_T(A, y))`` with respect to the atoms.

    ``traj`` must come from :func:`simplexcode.encoder.encode` on the same
    ``(A, y)``; its step size is treated as a constant.
    """
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    m = A.shape[1]
    if y.shape != (A.shape[0],):
        raise DimensionMismatch(f"dictionary {A.shape} and point {y.shape} disagree")
    T = traj.depth
    if (
        traj.iterates.shape != (T + 1, m)
        or traj.momentum_iterates.shape != (T + 1, m)
        or traj.active_sets.shape != (T, m)
        or len(traj.gammas) != T
    ):
        raise TrajectoryMismatch("trajectory shapes do not match the dictionary")
    if float(lam) != traj.lam:
        raise TrajectoryMismatch(f"trajectory was recorded with lam={traj.lam}, got {lam}")
    grad, _ = _backward_rows(
        A,
        y[None, :],
        traj.iterates[:, None, :],
        traj.momentum_iterates[:, None, :],
        traj.active_sets[:, None, :],
        traj.lam,
        traj.step_size,
        traj.gammas,
    )
    return grad


def unrolled_loss(A, y, params):
    """Loss at the encoder output; the function ``loss_gradient_A`` differentiates."""
    x = encode(A, y, params).final
    A = np.asarray(A, dtype=float)
    return float(_loss_rows(A, np.asarray(y, dtype=float)[None, :], x[None, :], params.lam)[0])


_DEFAULT_CONFIG = TrainConfig()


def train(Y, cfg=_DEFAULT_CONFIG, m=16, A0=None):
    """Minibatch gradient descent on the atoms through the unrolled encoder.

    ``Y`` is a d x n matrix (or a :class:`~simplexcode.datasets.Dataset`).
    Each epoch visits the points in a seeded random order; per batch the atoms
    move by ``-learning_rate`` times the mean gradient. With ``step_size='auto'``
    the encoder step is recomputed from the current atoms before every batch.
    """
    Y = np.asarray(getattr(Y, "points", Y), dtype=float)
    n = Y.shape[1]
    if n < cfg.batch_size:
        raise InsufficientData(f"batch size {cfg.batch_size} exceeds n={n}")
    init_seq, shuffle_seq = np.random.SeedSequence(cfg.seed).spawn(2)
    A = init_dictionary(Y, m, init_seq) if A0 is None else np.array(A0, dtype=float)
    gammas = momentum_schedule(cfg.unroll_depth).gammas
    shuffle_rng = np.random.default_rng(shuffle_seq)
    Yr = Y.T
    history = []
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        point_losses = np.empty(n)
        # overflow shows up as a non-finite loss and is reported per epoch
        with np.errstate(over="ignore", invalid="ignore"):
            for s in range(0, n, cfg.batch_size):
                idx = order[s:s + cfg.batch_size]
                alpha = default_step_size(A) if cfg.step_size == "auto" else float(cfg.step_size)
                try:
                    xs, xts, masks = _forward_rows(A, Yr[idx], cfg.lam, alpha, gammas)
                except NonFiniteIterate as exc:
                    raise NonFiniteLoss(epoch, f"encoder diverged in epoch {epoch}: {exc}") from exc
                grad, losses = _backward_rows(A, Yr[idx], xs, xts, masks, cfg.lam, alpha, gammas)
                point_losses[idx] = losses
                A = A - cfg.learning_rate * (grad / len(idx))
        mean_loss = float(np.mean(point_losses))
        if not np.isfinite(mean_loss) or not np.all(np.isfinite(A)):
            raise NonFiniteLoss(epoch)
        history.append(mean_loss)
        logger.debug("epoch %d loss %.6g", epoch, mean_loss)
    codes, _ = batch_encode(A, Y, cfg.encoder_params())
    return TrainReport(dictionary=A, codes=codes, loss_history=history, config=cfg)
