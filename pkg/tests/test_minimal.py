import numpy as np
import pytest

from chainscope.errors import PreconditionError
from chainscope.geometry import CellSet, Domain, Grid, fatten
from chainscope.minimal import (
    classify_component,
    dichotomy_report,
    is_graph_invariant,
    lyapunov_stability,
    minimal_sets,
    omega_limit,
    weak_basin,
)
from chainscope.systems import (
    constant,
    drift_control,
    identity_map,
    logistic,
    rotation,
    square,
)
from chainscope.transition import build_graph, forward_reach

BOX = Domain.box([[0.0, 1.0]])
GOLDEN = 0.6180339887


# --------------------------------------------------------------------------
# census
# --------------------------------------------------------------------------

def test_census_square_two_fixed_points():
    census = minimal_sets(square(), 0.02, levels=3, base_grid=Grid(BOX, 256))
    assert census.count == "finite>1"
    assert len(census.components) == 2
    kinds = [c.classification.kind for c in census.components]
    assert kinds == ["fixed-point", "fixed-point"]
    lo, hi = census.components
    assert 0 in lo.cells.indices()
    assert census.grid_finest.n_cells - 1 in hi.cells.indices()
    assert all(c.evidence_minimal for c in census.components)
    assert all(c.isolated == "yes" for c in census.components)


def test_census_constant_unique_stable_point():
    census = minimal_sets(constant(0.3), 0.02, levels=3,
                          base_grid=Grid(BOX, 256))
    assert census.count == "1"
    comp = census.components[0]
    assert comp.classification.kind == "fixed-point"
    assert census.grid_finest.cell_of(0.3) in comp.cells


def test_census_identity_unbounded_at_resolution():
    census = minimal_sets(identity_map(), 0.05, levels=3,
                          base_grid=Grid(BOX, 128))
    assert census.count == "unbounded-at-resolution"
    comp = census.components[0]
    assert not comp.shrinks and not comp.orbit_covers
    assert comp.isolated == "unknown-at-resolution"


def test_census_rotation_rational_full_circle_every_level():
    g = Grid(Domain.circle(), 3 * 2 ** 10)
    census = minimal_sets(rotation(1.0 / 3.0), 4 * g.cell_diameter, levels=2,
                          base_grid=g)
    assert census.level_component_counts == [1, 1]
    assert len(census.components[0].cells) == census.grid_finest.n_cells
    assert census.count == "unbounded-at-resolution"


def test_census_rotation_irrational_unique_minimal():
    g = Grid(Domain.circle(), 3 * 2 ** 10)
    census = minimal_sets(rotation(GOLDEN), 4 * g.cell_diameter, levels=2,
                          base_grid=g)
    assert census.count == "1"
    assert len(census.components[0].cells) == census.grid_finest.n_cells
    assert census.components[0].orbit_covers


def test_census_drift_control_single_invariant_interval():
    g = Grid(Domain.box([[-1, 1]]), 256)
    census = minimal_sets(drift_control(0.5), 0.04, levels=2, base_grid=g)
    assert census.count == "1"
    centers = census.components[0].cells.centers()[:, 0]
    assert centers.min() >= -0.3 and centers.max() <= 0.3


def test_census_component_refinement_nesting():
    base = Grid(BOX, 256)
    eps0 = 0.02
    sys = square()
    coarse = build_graph(sys, base, eps0)
    fine = build_graph(sys, base.refine(2), eps0 / 2)
    from chainscope.transition import recurrent_cells

    coarse_cells = CellSet.empty(base)
    for c in recurrent_cells(coarse):
        coarse_cells = coarse_cells | c
    fine_cells = CellSet.empty(base.refine(2))
    for c in recurrent_cells(fine):
        fine_cells = fine_cells | c
    assert fine_cells.issubset(fatten(coarse_cells.refine(2), eps0))


# --------------------------------------------------------------------------
# classification
# --------------------------------------------------------------------------

def test_classify_square_fixed_points():
    g = Grid(BOX, 1024)
    lo = classify_component(square(), CellSet.from_points(g, [[0.0]]))
    hi = classify_component(square(), CellSet.from_points(g, [[1.0]]))
    assert lo.kind == "fixed-point" and hi.kind == "fixed-point"


def test_classify_rotation_third_periodic():
    g = Grid(Domain.circle(), 3 * 2 ** 10)
    cls = classify_component(rotation(1.0 / 3.0),
                             CellSet.from_points(g, [[0.1]]))
    assert cls.kind == "periodic" and cls.period == 3


def test_classify_rotation_golden_other():
    g = Grid(Domain.circle(), 3 * 2 ** 10)
    cls = classify_component(rotation(GOLDEN), CellSet.from_points(g, [[0.2]]))
    assert cls.kind == "other"


def test_classify_periodicity_is_least_period():
    g = Grid(Domain.circle(), 1024)
    cls = classify_component(rotation(0.5), CellSet.from_points(g, [[0.3]]))
    assert cls.kind == "periodic" and cls.period == 2


def test_classify_multivalued_flags_pinned_control():
    g = Grid(Domain.box([[-1, 1]]), 512)
    cls = classify_component(drift_control(0.5),
                             CellSet.from_points(g, [[-0.2]]))
    assert cls.control_fixed == -0.1


# --------------------------------------------------------------------------
# Lyapunov stability
# --------------------------------------------------------------------------

def test_stability_square_origin_certified():
    g = Grid(BOX, 1024)
    res = lyapunov_stability(square(), CellSet.from_points(g, [[0.0]]), 0.1)
    assert res.flag == "stable-certified"
    assert res.w_radius == pytest.approx(0.05)


def test_stability_square_one_unstable_with_orbit_witness():
    g = Grid(BOX, 1024)
    res = lyapunov_stability(square(), CellSet.from_points(g, [[1.0]]), 0.1)
    assert res.flag == "unstable-witnessed"
    pts = res.witness_orbit[:, 0]
    assert pts[0] > 0.9 and pts.min() < 0.9   # genuinely leaves V


def test_stability_identity_inconclusive_fattening_artifact():
    g = Grid(BOX, 1024)
    res = lyapunov_stability(identity_map(), CellSet.from_points(g, [[0.5]]),
                             0.1)
    assert res.flag == "inconclusive"
    assert "fattening artifact" in res.note


def test_stability_certificate_replays():
    g = Grid(BOX, 1024)
    a = CellSet.from_points(g, [[0.0]])
    res = lyapunov_stability(square(), a, 0.1)
    graph = build_graph(square(), g, 4 * g.cell_diameter)
    reach = forward_reach(graph, fatten(a, res.w_radius))
    assert reach.issubset(fatten(a, 0.1))


def test_stability_requires_invariant_set():
    g = Grid(BOX, 1024)
    with pytest.raises(PreconditionError):
        lyapunov_stability(square(), CellSet.from_points(g, [[0.5]]), 0.1)


# --------------------------------------------------------------------------
# weak basin
# --------------------------------------------------------------------------

def test_weak_basin_square_excludes_top_cell():
    g = Grid(BOX, 128)
    basin = weak_basin(square(), CellSet.from_points(g, [[0.0]]), levels=2)
    idx = basin.indices()
    assert idx.min() == 0
    assert basin.grid.n_cells - 1 not in idx         # cl R(1) misses 0
    assert idx.size >= 0.95 * basin.grid.n_cells     # covers ~[0, 1)


def test_weak_basin_identity_shrinks_to_fattened_cell():
    g = Grid(BOX, 128)
    basin = weak_basin(identity_map(), CellSet.from_points(g, [[0.5]]),
                       levels=2)
    centers = basin.centers()[:, 0]
    assert np.all(np.abs(centers - 0.5) <= 0.05)
    assert basin.grid.cell_of(0.5) in basin


def test_weak_basin_constant_full_grid():
    g = Grid(BOX, 128)
    basin = weak_basin(constant(0.3), CellSet.from_points(g, [[0.3]]),
                       levels=2)
    assert len(basin) == basin.grid.n_cells


def test_weak_basin_contains_invariant_set():
    for sys, x in [(square(), 0.0), (constant(0.3), 0.3),
                   (identity_map(), 0.5)]:
        g = Grid(BOX, 128)
        a = CellSet.from_points(g, [[x]])
        basin = weak_basin(sys, a, levels=2)
        assert a.refine(2).issubset(basin)


def test_weak_basin_backward_closed_on_attracting_systems():
    """Lower-preimage fixed point, testable where chains match orbits."""
    from chainscope.transition import backward_reach

    g = Grid(BOX, 128)
    basin = weak_basin(constant(0.3), CellSet.from_points(g, [[0.3]]),
                       levels=2)
    graph = build_graph(constant(0.3), basin.grid,
                        4 * basin.grid.cell_diameter)
    assert backward_reach(graph, basin) == basin


def test_weak_basin_precondition():
    g = Grid(BOX, 128)
    with pytest.raises(PreconditionError):
        weak_basin(square(), CellSet.from_points(g, [[0.5]]))


# --------------------------------------------------------------------------
# omega limit
# --------------------------------------------------------------------------

def test_omega_logistic_fixed_point():
    g = Grid(BOX, 2048)
    res = omega_limit(logistic(2.8), 0.3, g)
    assert res.stabilized
    assert list(res.cells.indices()) == [g.cell_of(1 - 1 / 2.8)]


def test_omega_rotation_third():
    g = Grid(Domain.circle(), 12)
    res = omega_limit(rotation(1.0 / 3.0), 0.0, g)
    assert res.stabilized
    assert sorted(res.cells.indices()) == [0, 4, 8]


def test_omega_constant_single_cell():
    g = Grid(BOX, 100)
    res = omega_limit(constant(0.3), 0.77, g)
    assert res.stabilized
    assert list(res.cells.indices()) == [g.cell_of(0.3)]


def test_omega_multivalued_needs_control():
    g = Grid(Domain.box([[-1, 1]]), 64)
    with pytest.raises(PreconditionError):
        omega_limit(drift_control(0.5), 0.3, g)
    res = omega_limit(drift_control(0.5), 0.3, g, control=0.1)
    assert res.stabilized and list(res.cells.indices()) == [g.cell_of(0.2)]


# --------------------------------------------------------------------------
# dichotomy report
# --------------------------------------------------------------------------

def test_dichotomy_constant_consistent_and_attractive():
    rep = dichotomy_report(constant(0.3), [[0.9], [0.1]], eps0=0.02, levels=3,
                           base_grid=Grid(BOX, 256))
    assert rep.census.count == "1"
    assert rep.census.components[0].stability == "stable-certified"
    assert all(c.verdict == "robust-at-resolution" for c in rep.robustness)
    assert rep.verdict_consistency
    assert rep.global_attraction is True


def test_dichotomy_square_theorem_silent():
    rep = dichotomy_report(square(), [[1.0], [0.5]], eps0=0.02, levels=3,
                           base_grid=Grid(BOX, 256))
    assert rep.census.count == "finite>1"
    stabilities = sorted(c.stability for c in rep.census.components)
    assert stabilities == ["stable-certified", "unstable-witnessed"]
    verdicts = {c.verdict for c in rep.robustness}
    assert "non-robust-at-resolution" in verdicts
    assert rep.verdict_consistency          # vacuously: hypothesis not met
    assert any("theorem silent" in n for n in rep.notes)


def test_dichotomy_identity_converse_note():
    rep = dichotomy_report(identity_map(), [[0.5]], eps0=0.04, levels=3,
                           base_grid=Grid(BOX, 128))
    assert rep.census.count == "unbounded-at-resolution"
    assert rep.robustness[0].verdict == "non-robust-at-resolution"
    assert rep.verdict_consistency
    assert any("converse" in n for n in rep.notes)


def test_dichotomy_usc_stable_coherence():
    """All-robust samples force census components away from unstable."""
    for sys, pts, grid in [
        (constant(0.3), [[0.9]], Grid(BOX, 256)),
        (rotation(GOLDEN), [[0.0], [0.37]], Grid(Domain.circle(), 768)),
    ]:
        eps0 = 0.02 if sys.domain.kind == "box" else 4 * grid.cell_diameter
        rep = dichotomy_report(sys, pts, eps0=eps0, levels=2, base_grid=grid)
        if all(c.verdict == "robust-at-resolution" for c in rep.robustness):
            assert all(c.stability != "unstable-witnessed"
                       for c in rep.census.components)


def test_dichotomy_unique_minimal_attracts_omega_limits():
    rep = dichotomy_report(logistic(2.8), [[0.3], [0.7]], eps0=0.02, levels=2,
                           base_grid=Grid(BOX, 512))
    comp = next(c for c in rep.census.components
                if c.stability == "stable-certified")
    hull = fatten(comp.cells,
                  rep.census.eps_finest + rep.census.grid_finest.cell_diameter)
    for x in ([0.3], [0.7]):
        om = omega_limit(logistic(2.8), x, rep.census.grid_finest)
        assert om.cells.issubset(hull)


def test_is_graph_invariant_examples():
    g = Grid(BOX, 512)
    assert is_graph_invariant(square(), CellSet.from_points(g, [[0.0]]),
                              4 * g.cell_diameter)
    assert is_graph_invariant(square(), CellSet.from_points(g, [[1.0]]),
                              4 * g.cell_diameter)
    assert not is_graph_invariant(square(), CellSet.from_points(g, [[0.5]]),
                                  4 * g.cell_diameter)
