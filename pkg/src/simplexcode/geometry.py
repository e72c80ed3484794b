"""Delaunay geometry for small landmark sets.

Points are stored as columns of a ``d x m`` matrix throughout, matching the
dictionary convention used by the encoder. Triangulations are computed by
brute force over all ``(d+1)``-subsets, which is only meant for the desk-scale
landmark sets used to certify sparse recovery (m <= 50, d in {2, 3}).
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import _io
from .errors import (
    DegenerateSimplex,
    DimensionMismatch,
    NonUniqueTriangulation,
    NotGeneralPosition,
    OutsideHull,
)

COSPHERICAL_TOL = 1e-9
BARYCENTRIC_TOL = 1e-10
_CHUNK = 20000


@dataclass(frozen=True)
class Landmarks:
    """A ``d x m`` landmark matrix with its invariants checked."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim != 2:
            raise DimensionMismatch("landmarks must be a d x m matrix")
        d, m = pts.shape
        if m < d + 1:
            raise DimensionMismatch(f"need at least d+1={d + 1} landmarks, got {m}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("landmarks must be finite")
        gaps = np.linalg.norm(pts[:, :, None] - pts[:, None, :], axis=0)
        gaps[np.diag_indices(m)] = np.inf
        if np.min(gaps) <= 1e-12:
            raise ValueError("landmarks contain duplicate points")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self):
        return self.points.shape[0]

    @property
    def count(self):
        return self.points.shape[1]


@dataclass(frozen=True)
class CircumSphere:
    center: np.ndarray
    radius: float


@dataclass
class Triangulation:
    """Delaunay cells (sorted index tuples) and their circumspheres."""

    cells: list
    spheres: list = field(default_factory=list)

    @property
    def dim(self):
        return len(self.cells[0]) - 1 if self.cells else 0

    def __len__(self):
        return len(self.cells)


def _points(landmarks):
    if isinstance(landmarks, Landmarks):
        return landmarks.points
    return np.asarray(landmarks, dtype=float)


def _normalized_volume(edges):
    """|det| of the edge matrix divided by the product of edge lengths.

    ``edges`` has shape (..., d, d) with edges as columns. The ratio is scale
    free and equals 1 for an orthogonal corner.
    """
    det = np.abs(np.linalg.det(edges))
    lengths = np.prod(np.linalg.norm(edges, axis=-2), axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(lengths > 0, det / lengths, 0.0)
    return out


def _spheres(P, idx):
    """Circumcenters, radii and normalized volumes for index rows ``idx``.

    Degenerate simplices get NaN centers.
    """
    V = np.moveaxis(P[:, idx], 0, -1)  # (K, d+1, d)
    base = V[:, 0, :]
    E = V[:, 1:, :] - base[:, None, :]  # (K, d, d) rows are edges
    vol = _normalized_volume(np.swapaxes(E, -1, -2))
    ok = vol > 1e-14
    rhs = 0.5 * np.sum(E**2, axis=-1)
    u = np.full(base.shape, np.nan)
    if np.any(ok):
        u[ok] = np.linalg.solve(E[ok], rhs[ok][..., None])[..., 0]
    centers = base + u
    radii = np.linalg.norm(u, axis=-1)
    return centers, radii, vol


def circumsphere(vertices, tol=1e-12):
    """Circumscribed sphere of a simplex given as ``d x (d+1)`` columns."""
    V = np.asarray(vertices, dtype=float)
    d = V.shape[0]
    if V.ndim != 2 or V.shape[1] != d + 1:
        raise DimensionMismatch(f"expected a d x (d+1) matrix, got shape {V.shape}")
    E = (V[:, 1:] - V[:, :1]).T
    if _normalized_volume(E.T) <= tol:
        raise DegenerateSimplex("vertices are affinely dependent")
    u = np.linalg.solve(E, 0.5 * np.sum(E**2, axis=1))
    return CircumSphere(center=V[:, 0] + u, radius=float(np.linalg.norm(u)))


def simplex_volume(vertices):
    V = np.asarray(vertices, dtype=float)
    d = V.shape[0]
    E = V[:, 1:] - V[:, :1]
    return abs(float(np.linalg.det(E))) / float(np.prod(np.arange(1, d + 1)))


def barycentric_coords(vertices, y, tol=1e-12):
    """Affine weights of ``y`` with respect to the simplex ``vertices``.

    Solves ``[V; 1^T] x = [y; 1]``.
    """
    V = np.asarray(vertices, dtype=float)
    y = np.asarray(y, dtype=float)
    d = V.shape[0]
    if V.shape != (d, d + 1) or y.shape != (d,):
        raise DimensionMismatch("vertices must be d x (d+1) and y a d-vector")
    if _normalized_volume(V[:, 1:] - V[:, :1]) <= tol:
        raise DegenerateSimplex("vertices are affinely dependent")
    M = np.vstack([V, np.ones((1, d + 1))])
    x = np.linalg.solve(M, np.append(y, 1.0))
    # push the affine constraint residue onto the largest weight
    x[np.argmax(x)] += 1.0 - x.sum()
    return x


def _subset_array(m, k):
    return np.array(list(combinations(range(m), k)), dtype=np.intp).reshape(-1, k)


def general_position_check(landmarks, tol=COSPHERICAL_TOL):
    """Check that no d+1 landmarks are affinely dependent and no d+2 are cospherical.

    Returns ``(ok, report)`` with ``report`` listing offending index sets under
    the keys ``"affinely_dependent"`` and ``"cospherical"``.
    """
    P = _points(landmarks)
    d, m = P.shape
    dependent = []
    cospherical = set()
    idx_all = _subset_array(m, d + 1)
    for start in range(0, len(idx_all), _CHUNK):
        idx = idx_all[start:start + _CHUNK]
        centers, radii, vol = _spheres(P, idx)
        bad = vol <= tol
        dependent.extend(tuple(int(i) for i in row) for row in idx[bad])
        good = ~bad
        if not np.any(good):
            continue
        dist = np.linalg.norm(P.T[None, :, :] - centers[good][:, None, :], axis=-1)
        near = np.abs(dist - radii[good][:, None]) <= tol * radii[good][:, None]
        rows = idx[good]
        near[np.arange(len(rows))[:, None], rows] = False
        for r, k in zip(*np.nonzero(near)):
            cospherical.add(tuple(sorted([int(i) for i in rows[r]] + [int(k)])))
    report = {
        "affinely_dependent": sorted(dependent),
        "cospherical": sorted(cospherical),
    }
    ok = not report["affinely_dependent"] and not report["cospherical"]
    return ok, report


def delaunay_triangulate(landmarks, tol=COSPHERICAL_TOL):
    """Unique Delaunay triangulation by enumeration of empty circumspheres."""
    P = _points(landmarks)
    d, m = P.shape
    if d not in (2, 3):
        raise DimensionMismatch(f"triangulation supports d in {{2, 3}}, got d={d}")
    ok, report = general_position_check(P, tol)
    if report["cospherical"]:
        raise NonUniqueTriangulation(
            f"cospherical landmark subsets: {report['cospherical'][:5]}"
        )
    if not ok:
        raise NotGeneralPosition(
            f"affinely dependent landmark subsets: {report['affinely_dependent'][:5]}"
        )
    cells, spheres = [], []
    idx_all = _subset_array(m, d + 1)
    for start in range(0, len(idx_all), _CHUNK):
        idx = idx_all[start:start + _CHUNK]
        centers, radii, _ = _spheres(P, idx)
        dist = np.linalg.norm(P.T[None, :, :] - centers[:, None, :], axis=-1)
        dist[np.arange(len(idx))[:, None], idx] = np.inf
        empty = np.all(dist > radii[:, None], axis=1)
        for r in np.flatnonzero(empty):
            cells.append(tuple(int(i) for i in idx[r]))
            spheres.append(CircumSphere(center=centers[r].copy(), radius=float(radii[r])))
    # combinations() already yields lexicographic order
    return Triangulation(cells=cells, spheres=spheres)


def cell_barycentrics(tri, landmarks, y):
    """Barycentric coordinates of ``y`` in every cell, shape (n_cells, d+1)."""
    P = _points(landmarks)
    y = np.asarray(y, dtype=float)
    if y.shape != (P.shape[0],):
        raise DimensionMismatch("y must be a d-vector")
    idx = np.asarray(tri.cells, dtype=np.intp)
    V = P[:, idx]  # (d, K, d+1)
    M = np.concatenate([np.moveaxis(V, 1, 0), np.ones((len(idx), 1, idx.shape[1]))], axis=1)
    rhs = np.broadcast_to(np.append(y, 1.0), (len(idx), idx.shape[1]))
    return np.linalg.solve(M, rhs[..., None])[..., 0]


def containing_cells(tri, landmarks, y, tol=BARYCENTRIC_TOL):
    """Indices of all cells whose barycentric coordinates for ``y`` are >= -tol."""
    coords = cell_barycentrics(tri, landmarks, y)
    return [int(i) for i in np.flatnonzero(coords.min(axis=1) >= -tol)]


def locate_cell(tri, landmarks, y, tol=BARYCENTRIC_TOL):
    """Return ``(cell_index, coords)`` for the cell containing ``y``.

    When ``y`` lies on a shared face the most interior candidate wins.
    """
    coords = cell_barycentrics(tri, landmarks, y)
    worst = coords.min(axis=1)
    best = int(np.argmax(worst))
    if worst[best] < -tol:
        raise OutsideHull("point lies outside the convex hull of the landmarks")
    return best, coords[best]


def load_landmarks_csv(path):
    """Read landmarks stored one point per row; returns a d x m matrix."""
    return _io.read_rows_csv(path).T


def save_landmarks_csv(path, landmarks):
    _io.write_rows_csv(path, _points(landmarks).T)
