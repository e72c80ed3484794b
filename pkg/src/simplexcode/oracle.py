"""Exact minimizers of the weighted l1 / l0 programs by support enumeration.

Every vertex of the feasible polytope ``{x >= 0, sum x = 1, A x = y}`` has at
most ``d+1`` nonzeros, so solving the square or overdetermined system
``[A_S; 1^T] x_S = [y; 1]`` over all supports ``|S| <= d+1`` and keeping the
best feasible solution gives the exact optimum of the (linear) weighted l1
program. The same enumeration lists every candidate support for the weighted
l0 program. These solvers are the brute-force oracles used to certify that the
optimal support is the Delaunay cell containing ``y``.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ._parallel import pmap
from .datasets import gen_delaunay_model
from .errors import (
    DimensionMismatch,
    EnumerationBudgetExceeded,
    Infeasible,
    OutsideHull,
)
from .geometry import containing_cells
from .simplex import SUPPORT_TOL

MAX_ATOMS = 25
CLIP_TOL = 1e-10


@dataclass
class RecoveryResult:
    code: np.ndarray
    support: tuple
    objective: float
    matched_cell: int = None


class SupportTable:
    """Pseudo-inverses of ``[A_S; 1^T]`` for every support of size <= d+1.

    Built once per dictionary and reused for many right-hand sides.
    """

    def __init__(self, A, max_atoms=MAX_ATOMS):
        A = np.asarray(A, dtype=float)
        if A.ndim != 2:
            raise DimensionMismatch("dictionary must be a d x m matrix")
        d, m = A.shape
        if m > max_atoms:
            raise EnumerationBudgetExceeded(f"m={m} exceeds the enumeration bound {max_atoms}")
        self.A = A
        self.res_tol = 1e-9 * max(1.0, float(np.abs(A).max()))
        self.blocks = []
        for k in range(1, min(d + 1, m) + 1):
            idx = np.array(list(combinations(range(m), k)), dtype=np.intp)
            M = np.concatenate([np.moveaxis(A[:, idx], 0, 1), np.ones((len(idx), 1, k))], axis=1)
            self.blocks.append((idx, M, np.linalg.pinv(M)))

    def feasible(self, y):
        """All feasible ``(support_indices, clipped_coeffs)`` pairs for ``y``."""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.A.shape[0],):
            raise DimensionMismatch(f"point of shape {y.shape} for d={self.A.shape[0]}")
        rhs = np.append(y, 1.0)
        out = []
        for idx, M, Minv in self.blocks:
            X = Minv @ rhs
            res = np.abs(np.einsum("cij,cj->ci", M, X) - rhs).max(axis=1)
            ok = (res <= self.res_tol * max(1.0, float(np.abs(y).max()))) & np.all(X >= -CLIP_TOL, axis=1)
            for r in np.flatnonzero(ok):
                out.append((idx[r], np.maximum(X[r], 0.0)))
        return out


def _candidates(table, y, support_tol):
    """Feasible codes keyed by effective support, with both objectives."""
    A = table.A
    m = A.shape[1]
    w = np.sum((A - np.asarray(y, dtype=float)[:, None]) ** 2, axis=0)
    cands = []
    for idx, coeffs in table.feasible(y):
        code = np.zeros(m)
        code[idx] = coeffs
        support = tuple(int(j) for j in np.flatnonzero(code > support_tol))
        l1 = float(code @ w)
        l0 = float(np.sum(w[list(support)]))
        cands.append((support, code, l1, l0))
    if not cands:
        raise Infeasible("y is not a convex combination of the atoms")
    return cands


def _pick(cands, which):
    key = (lambda c: (c[2], len(c[0]), c[0])) if which == "l1" else (lambda c: (c[3], len(c[0]), c[0]))
    best = min(cands, key=key)
    return RecoveryResult(code=best[1], support=best[0], objective=best[2] if which == "l1" else best[3])


def solve_weighted_l1_exact(A, y, support_tol=SUPPORT_TOL, table=None):
    """Minimize ``sum_j x_j ||y - a_j||^2`` subject to ``A x = y`` on the simplex."""
    table = SupportTable(A) if table is None else table
    return _pick(_candidates(table, y, support_tol), "l1")


def solve_weighted_l0_exact(A, y, support_tol=SUPPORT_TOL, table=None):
    """Minimize the support-indicator weighted sum subject to ``A x = y``.

    Ties go to the smaller support, then the lexicographically smaller one.
    """
    table = SupportTable(A) if table is None else table
    return _pick(_candidates(table, y, support_tol), "l0")


def l0_support_values(A, y, support_tol=SUPPORT_TOL, table=None):
    """Weighted l0 value of every distinct feasible support, as a dict."""
    table = SupportTable(A) if table is None else table
    return {c[0]: c[3] for c in _candidates(table, y, support_tol)}


def match_cell(tri, landmarks, y, support, tol=1e-8):
    """Index of a cell containing ``y`` whose vertices include ``support``, else None."""
    cells = containing_cells(tri, landmarks, y, tol)
    if not cells:
        raise OutsideHull("point lies outside the convex hull of the landmarks")
    s = set(support)
    for c in cells:
        if s <= set(tri.cells[c]):
            return c
    return None


def verify_recovery(tri, landmarks, y, result, tol=1e-8):
    """True iff the recovered support spans a face of a cell containing ``y``."""
    return match_cell(tri, landmarks, y, result.support, tol) is not None


def _certify_instance(args):
    m, d, points, min_weight, seed = args
    data, truth = gen_delaunay_model(m, points, d, seed=seed, min_weight=min_weight)
    L, tri = truth.landmarks, truth.triangulation
    table = SupportTable(L)
    rows = []
    for i in range(points):
        y = data.points[:, i]
        cell = tri.cells[int(truth.cell_assignments[i])]
        cands = _candidates(table, y, SUPPORT_TOL)
        l1 = _pick(cands, "l1")
        l0 = _pick(cands, "l0")
        l1.matched_cell = match_cell(tri, L, y, l1.support)
        l0.matched_cell = match_cell(tri, L, y, l0.support)
        values = {c[0]: c[3] for c in cands}
        others = [v for s, v in values.items() if s != cell]
        margin = min(others) - values[cell] if others and cell in values else None
        rows.append({
            "point": [float(v) for v in y],
            "cell": list(cell),
            "l1_support": list(l1.support),
            "l1_objective": l1.objective,
            "l1_matched_cell": l1.matched_cell,
            "l0_support": list(l0.support),
            "l0_objective": l0.objective,
            "l0_matched_cell": l0.matched_cell,
            "l0_margin": margin,
            "l1_pass": bool(l1.support == cell and l1.matched_cell is not None),
            "l0_pass": bool(
                l0.support == cell and margin is not None and margin >= 1e-12
            ),
        })
    return {
        "seed": seed,
        "landmarks": L.T.tolist(),
        "n_cells": len(tri.cells),
        "points": rows,
        "l1_pass": all(r["l1_pass"] for r in rows),
        "l0_pass": all(r["l0_pass"] for r in rows),
    }


def certify(m=12, d=2, instances=100, points=20, min_weight=1e-3, seed=0):
    """Monte Carlo certification that both exact solvers recover the enclosing cell.

    Returns a JSON-ready report with one entry per landmark instance and
    aggregate pass rates over all points.
    """
    seeds = np.random.SeedSequence(seed).generate_state(instances, dtype=np.uint64)
    jobs = [(m, d, points, min_weight, int(s)) for s in seeds]
    results = pmap(_certify_instance, jobs)
    total = instances * points
    l1_ok = sum(r["l1_pass"] for inst in results for r in inst["points"])
    l0_ok = sum(r["l0_pass"] for inst in results for r in inst["points"])
    return {
        "config": {
            "m": m, "d": d, "instances": instances, "points": points,
            "min_weight": min_weight, "seed": seed,
        },
        "instances": results,
        "l1_pass_rate": l1_ok / total if total else 1.0,
        "l0_pass_rate": l0_ok / total if total else 1.0,
        "pass_rate": min(l1_ok, l0_ok) / total if total else 1.0,
    }
