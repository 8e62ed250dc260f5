"""Lyapunov stability flags, weak basins, and omega limits for x -> x^2.

The two fixed points of the squaring map split cleanly: 0 gets a stability
certificate (a fattening whose entire graph reach stays inside the target
neighborhood) and 1 gets a sampled escaping orbit.  The weak basin of {0}
is everything except the top of the interval: the orbit of exactly 1.0
never comes near 0, and the corner-probe rule keeps its cell out.
"""
from chainscope import (
    CellSet,
    Domain,
    Grid,
    identity_map,
    logistic,
    lyapunov_stability,
    omega_limit,
    rotation,
    square,
    weak_basin,
)

box = Domain.box([[0.0, 1.0]])
g = Grid(box, 1024)

res = lyapunov_stability(square(), CellSet.from_points(g, [[0.0]]), v_eps=0.1)
print("A = {0}: ", res.flag, " certified W radius =", res.w_radius)

res = lyapunov_stability(square(), CellSet.from_points(g, [[1.0]]), v_eps=0.1)
print("A = {1}: ", res.flag)
print("  escaping orbit starts at", res.witness_orbit[0][0],
      "and falls to", res.witness_orbit[-1][0])

res = lyapunov_stability(identity_map(), CellSet.from_points(g, [[0.5]]),
                         v_eps=0.1)
print("identity A = {0.5}: ", res.flag)
print("  note:", res.note)

# -- weak basin ---------------------------------------------------------------
gb = Grid(box, 128)
basin = weak_basin(square(), CellSet.from_points(gb, [[0.0]]), levels=2)
idx = basin.indices()
top = basin.grid.n_cells - 1
print("\nweak basin of {0} under x^2:")
print(f"  covers cells {idx.min()}..{idx.max()} of {basin.grid.n_cells}")
print(f"  top cell excluded: {top not in idx}"
      "  (the orbit of 1.0 stays at 1, so 1 is not in the basin)")

basin = weak_basin(identity_map(), CellSet.from_points(gb, [[0.5]]), levels=2)
print("identity basin of {0.5} hugs the cell:",
      [round(c, 3) for c in basin.centers()[:, 0]])

# -- omega limits ---------------------------------------------------------------
g2 = Grid(box, 2048)
om = omega_limit(logistic(2.8), 0.3, g2)
print("\nomega limit of 0.3 under logistic(2.8):",
      [round(c, 6) for c in om.cells.centers()[:, 0]],
      "~ the fixed point", round(1 - 1 / 2.8, 6))

om = omega_limit(rotation(1.0 / 3.0), 0.0, Grid(Domain.circle(), 12))
print("omega limit of 0 under rotation(1/3): cells", sorted(om.cells.indices()))
