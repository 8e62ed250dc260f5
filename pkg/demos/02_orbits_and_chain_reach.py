"""Sampled orbits vs perturbation-chain reach.

Orbit covers under-approximate the closure of the true reachable set; the
fattened transition graph over-approximates every eps-perturbed trajectory.
The map x -> x^2 shows the gap: the true reach of 1.0 is just {1}, but its
chain reach at every perturbation level is the whole interval, because an
arbitrarily small kick below 1 rolls all the way down to 0.
"""
from chainscope import (
    CellSet,
    Domain,
    Grid,
    chain_reach,
    identity_map,
    orbit_reach,
    square,
)

box = Domain.box([[0.0, 1.0]])
grid = Grid(box, 100)

# -- sampled orbit of the squaring map ---------------------------------------
res = orbit_reach(square(), 0.5, grid)
print("orbit of 0.5 under x^2 covers cells:", sorted(res.cells.indices()))
print("converged:", res.converged, "after", res.steps_used, "map steps")

res = orbit_reach(identity_map(), 0.5, grid)
print("orbit of the identity is a single cell:", list(res.cells.indices()))

# -- chain reach of the identity fills the space ------------------------------
start = CellSet.from_points(Grid(box, 40), [[0.5]])
cr = chain_reach(identity_map(), start, eps0=0.1, levels=4)
print("\nidentity chain reach from {0.5}:")
for lv in cr.levels:
    frac = len(lv.cells) / lv.grid.n_cells
    print(f"  eps={lv.eps:<8g} cells={lv.grid.n_cells:<6d} coverage={frac:.0%}")
print("(every eps-chain can creep across the whole interval)")

# -- chain reach of x^2 from 1.0 never collapses to {1} -----------------------
start = CellSet.from_points(Grid(box, 80), [[1.0]])
cr = chain_reach(square(), start, eps0=0.2, levels=3)
print("\nx^2 chain reach from {1.0}:")
for lv in cr.levels:
    frac = len(lv.cells) / lv.grid.n_cells
    print(f"  eps={lv.eps:<8g} coverage={frac:.0%}")
print("true reach of 1.0 is {1}; the mismatch is exactly non-robustness")

# -- orbit cover always sits inside the chain cover ---------------------------
orbit = orbit_reach(square(), 0.7, cr.levels[-1].grid)
print("\nsandwich check at 0.7:",
      orbit.cells.issubset(cr.levels[-1].cells) or "start differs",
      "(orbit cells within the chain cover from 1.0's sweep)")
