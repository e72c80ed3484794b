"""Synthetic generators, the Delaunay generative model and an IDX image reader."""

import gzip
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from . import _io
from .errors import (
    BadMagic,
    CountMismatch,
    GeneralPositionFailure,
    InsufficientData,
    TruncatedFile,
)
from .geometry import (
    Triangulation,
    delaunay_triangulate,
    general_position_check,
    simplex_volume,
)

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass
class Dataset:
    """Points as columns of a d x n matrix, optional integer labels."""

    points: np.ndarray
    labels: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if not np.all(np.isfinite(self.points)):
            raise ValueError("dataset contains non-finite values")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.points.shape[1],):
                raise ValueError("labels must have one entry per point")

    @property
    def n(self):
        return self.points.shape[1]

    @property
    def dim(self):
        return self.points.shape[0]


@dataclass
class GenerativeGroundTruth:
    landmarks: np.ndarray
    triangulation: Triangulation
    true_codes: np.ndarray
    cell_assignments: np.ndarray


def gen_circle(n, sigma=0.01, seed=0):
    """Noisy samples of the unit circle, angles uniform on [0, 2 pi)."""
    if n < 1 or sigma < 0:
        raise ValueError("need n >= 1 and sigma >= 0")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    pts = np.vstack([np.cos(theta), np.sin(theta)])
    pts = pts + sigma * rng.standard_normal((2, n))
    meta = {"generator": "circle", "n": n, "sigma": sigma, "seed": seed}
    return Dataset(points=pts, labels=np.zeros(n, dtype=np.int64), meta=meta)


def gen_two_moons(n, sigma=0.05, seed=0):
    """Two interleaved half circles: ``(cos t, sin t)`` and ``(1 - cos t, 0.5 - sin t)``.

    The first ``ceil(n/2)`` points belong to the upper arc (label 0).
    """
    if n < 2 or sigma < 0:
        raise ValueError("need n >= 2 and sigma >= 0")
    rng = np.random.default_rng(seed)
    n0 = (n + 1) // 2
    n1 = n - n0
    t0 = rng.uniform(0.0, np.pi, size=n0)
    t1 = rng.uniform(0.0, np.pi, size=n1)
    upper = np.vstack([np.cos(t0), np.sin(t0)])
    lower = np.vstack([1.0 - np.cos(t1), 0.5 - np.sin(t1)])
    pts = np.hstack([upper, lower]) + sigma * rng.standard_normal((2, n))
    labels = np.concatenate([np.zeros(n0, dtype=np.int64), np.ones(n1, dtype=np.int64)])
    meta = {"generator": "moons", "n": n, "sigma": sigma, "seed": seed}
    return Dataset(points=pts, labels=labels, meta=meta)


def _dirichlet_floor(rng, k, floor, size):
    out = np.empty((size, k))
    filled = 0
    while filled < size:
        draw = rng.dirichlet(np.ones(k), size=2 * (size - filled) + 8)
        draw = draw[np.all(draw >= floor, axis=1)]
        take = min(len(draw), size - filled)
        out[filled:filled + take] = draw[:take]
        filled += take
    return out


def gen_delaunay_model(m, n, d=2, seed=0, min_weight=1e-3, max_attempts=100):
    """Points generated as convex combinations of Delaunay cell vertices.

    Landmarks are uniform in the unit cube, redrawn until they are in general
    position. Each point picks a cell with probability proportional to its
    volume and Dirichlet(1) weights conditioned on every weight >= ``min_weight``.
    """
    if d not in (2, 3):
        raise ValueError("d must be 2 or 3")
    if m < d + 2:
        raise ValueError(f"need m >= d+2 = {d + 2} landmarks")
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        L = rng.uniform(0.0, 1.0, size=(d, m))
        if general_position_check(L)[0]:
            break
    else:
        raise GeneralPositionFailure(f"no general-position landmark set in {max_attempts} draws")
    tri = delaunay_triangulate(L)
    cells = np.asarray(tri.cells, dtype=np.intp)
    vols = np.array([simplex_volume(L[:, c]) for c in cells])
    assign = rng.choice(len(cells), size=n, p=vols / vols.sum())
    weights = _dirichlet_floor(rng, d + 1, min_weight, n)
    codes = np.zeros((m, n))
    codes[cells[assign].T, np.arange(n)] = weights.T
    pts = L @ codes
    meta = {"generator": "delaunay-model", "m": m, "n": n, "d": d, "seed": seed}
    truth = GenerativeGroundTruth(
        landmarks=L, triangulation=tri, true_codes=codes, cell_assignments=assign
    )
    return Dataset(points=pts, meta=meta), truth


# IDX files ---------------------------------------------------------------

def _read_bytes(path):
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "rb") as fh:
        return fh.read()


def _parse_idx(raw, magic, path):
    if len(raw) < 8:
        raise TruncatedFile(f"{path}: header too short")
    (got,) = struct.unpack(">I", raw[:4])
    if got != magic:
        raise BadMagic(f"{path}: magic 0x{got:08x}, expected 0x{magic:08x}")
    ndim = magic & 0xFF
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise TruncatedFile(f"{path}: header too short")
    dims = struct.unpack(f">{ndim}I", raw[4:header])
    size = int(np.prod(dims))
    if len(raw) < header + size:
        raise TruncatedFile(f"{path}: expected {size} data bytes, found {len(raw) - header}")
    return np.frombuffer(raw, dtype=np.uint8, count=size, offset=header).reshape(dims)


def read_idx_images(path):
    return _parse_idx(_read_bytes(path), IDX_IMAGES_MAGIC, path)


def read_idx_labels(path):
    return _parse_idx(_read_bytes(path), IDX_LABELS_MAGIC, path)


def write_idx(path, array):
    """Write a uint8 array of rank 1 (labels) or 3 (images) in IDX format."""
    array = np.ascontiguousarray(array, dtype=np.uint8)
    magic = 0x00000800 | array.ndim
    header = struct.pack(f">I{array.ndim}I", magic, *array.shape)
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "wb") as fh:
        fh.write(header + array.tobytes())


def load_idx(images_path, labels_path, digits=(0, 3, 4, 6, 7), per_digit=200, seed=0):
    """Load an IDX image/label pair and subsample ``per_digit`` items per digit.

    Pixels are scaled to [0, 1] and flattened, giving a d x n matrix with
    columns grouped by digit in ascending order. Labels are remapped to
    ``0..len(digits)-1``.
    """
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if images.shape[0] != labels.shape[0]:
        raise CountMismatch(f"{images.shape[0]} images but {labels.shape[0]} labels")
    digits = sorted({int(v) for v in digits})
    rng = np.random.default_rng(seed)
    cols, out_labels = [], []
    for k, digit in enumerate(digits):
        pool = np.flatnonzero(labels == digit)
        if len(pool) < per_digit:
            raise InsufficientData(f"digit {digit}: {len(pool)} examples, need {per_digit}")
        pick = np.sort(rng.choice(pool, size=per_digit, replace=False))
        cols.append(pick)
        out_labels.append(np.full(per_digit, k, dtype=np.int64))
    idx = np.concatenate(cols)
    flat = images[idx].reshape(len(idx), -1).astype(float) / 255.0
    meta = {
        "generator": "idx",
        "images": os.path.basename(str(images_path)),
        "digits": digits,
        "per_digit": per_digit,
        "seed": seed,
    }
    return Dataset(points=flat.T, labels=np.concatenate(out_labels), meta=meta)


# CSV + JSON sidecar ------------------------------------------------------

def save_dataset(out_dir, dataset, name="points"):
    """Write ``<name>.csv`` (one point per row) and ``<name>.json`` (meta, labels)."""
    os.makedirs(out_dir, exist_ok=True)
    _io.write_rows_csv(os.path.join(out_dir, f"{name}.csv"), dataset.points.T)
    sidecar = {
        "meta": dataset.meta,
        "labels": None if dataset.labels is None else [int(v) for v in dataset.labels],
    }
    _io.write_json(os.path.join(out_dir, f"{name}.json"), sidecar)


def load_dataset(csv_path, sidecar_path=None):
    pts = _io.read_rows_csv(csv_path).T
    if sidecar_path is None:
        guess = os.path.splitext(csv_path)[0] + ".json"
        sidecar_path = guess if os.path.exists(guess) else None
    labels, meta = None, {"generator": "csv", "path": os.path.basename(csv_path)}
    if sidecar_path is not None:
        side = _io.read_json(sidecar_path)
        labels = side.get("labels")
        meta = side.get("meta", meta)
    return Dataset(points=pts, labels=labels, meta=meta)
