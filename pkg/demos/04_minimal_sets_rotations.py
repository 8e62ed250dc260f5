"""Minimal-set censuses: rational vs irrational circle rotations.

Both rotations leave the whole circle recurrent at every resolution, yet
they are opposite cases: the rational rotation decomposes into a continuum
of periodic orbits (census honestly reports unbounded-at-resolution), while
the irrational one is a single minimal set covered by any orbit (census 1).
"""
from chainscope import CellSet, Domain, Grid, classify_component, minimal_sets, rotation

GOLDEN = 0.6180339887

grid = Grid(Domain.circle(), 3 * 2 ** 10)
eps0 = 4 * grid.cell_diameter

# -- theta = 1/3 ---------------------------------------------------------------
sys3 = rotation(1.0 / 3.0)
census = minimal_sets(sys3, eps0, levels=2, base_grid=grid)
print("rotation(1/3):")
print("  recurrent components per level:", census.level_component_counts)
print("  component size:", len(census.components[0].cells),
      "of", census.grid_finest.n_cells, "cells (full circle)")
print("  census:", census.count)
print("  (every point lies on its own 3-cycle; the grid cannot split them)")

for p in (0.0, 0.1, 0.55):
    cls = classify_component(sys3, CellSet.from_points(grid, [[p]]))
    print(f"  classify at {p}: {cls.label()}")

# -- irrational theta ------------------------------------------------------------
census = minimal_sets(rotation(GOLDEN), eps0, levels=2, base_grid=grid)
comp = census.components[0]
print("\nrotation(golden ratio conjugate):")
print("  census:", census.count)
print("  orbit covers the component:", comp.orbit_covers)
print("  classification:", comp.classification.label(),
      "(no period up to q_max: a minimal set that is not a cycle)")

# -- a contracting interval map for contrast -------------------------------------
from chainscope import square

box_grid = Grid(Domain.box([[0.0, 1.0]]), 256)
census = minimal_sets(square(), 0.02, levels=3, base_grid=box_grid)
print("\nx^2 on [0,1]:")
print("  census:", census.count)
for c in census.components:
    lo = c.cells.centers()[:, 0].min()
    hi = c.cells.centers()[:, 0].max()
    print(f"  component around [{lo:.3f}, {hi:.3f}]: {c.classification.label()},"
          f" isolated={c.isolated}, shrinks under refinement={c.shrinks}")
