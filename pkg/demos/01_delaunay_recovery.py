"""
Exact recovery on a Delaunay triangulation
==========================================

Points drawn inside a Delaunay cell are written as convex combinations of
the landmarks. Minimizing the coefficient-weighted sum of squared distances
picks out exactly the vertices of the cell. The support-weighted version
usually agrees, but not always; the last block shows a small landmark set
where it prefers a triangle that is not part of the triangulation.
"""

import numpy as np

from simplexcode.datasets import gen_delaunay_model
from simplexcode.geometry import delaunay_triangulate
from simplexcode.oracle import (
    l0_support_values,
    solve_weighted_l0_exact,
    solve_weighted_l1_exact,
)

# twelve landmarks in the unit square and thirty points inside random cells
data, truth = gen_delaunay_model(m=12, n=30, d=2, seed=0)
L, tri = truth.landmarks, truth.triangulation
print(f"{L.shape[1]} landmarks, {len(tri)} Delaunay cells")

hits = 0
for i in range(data.n):
    y = data.points[:, i]
    cell = tri.cells[truth.cell_assignments[i]]
    res = solve_weighted_l1_exact(L, y)
    hits += res.support == cell
print(f"weighted l1 recovers the enclosing cell for {hits}/{data.n} points")

# the recovered code is the barycentric coordinate vector of y in its cell
y = data.points[:, 0]
res = solve_weighted_l1_exact(L, y)
print("support", res.support, "weights", np.round(res.code[list(res.support)], 4))
print("true   ", tri.cells[truth.cell_assignments[0]],
      "weights", np.round(truth.true_codes[list(res.support), 0], 4))

# five landmarks where counting supports instead of weighting them goes wrong
L5 = np.array([[0.3, 0.0, 0.8, 0.1, 0.1],
               [1.0, 0.8, 0.3, 0.1, 0.4]])
print("\ncells:", delaunay_triangulate(L5).cells)
y = L5[:, [0, 2, 4]] @ np.array([0.1, 0.2, 0.7])
values = l0_support_values(L5, y)
print("weighted l1 support:", solve_weighted_l1_exact(L5, y).support)
print("weighted l0 support:", solve_weighted_l0_exact(L5, y).support)
print(f"l0 value of the cell (0, 2, 4): {values[(0, 2, 4)]:.4f}, of (1, 2, 4): {values[(1, 2, 4)]:.4f}")
