"""The unique-or-infinite alternative, tested on concrete systems.

For a robust system on a connected compact space, the census of minimal
sets must be either a single stable one or an unbounded family with no
isolated member.  The report runs the census, stability flags, and sampled
robustness checks, then asserts only the forward implication.
"""
from chainscope import Domain, Grid, constant, dichotomy_report, identity_map, square

box = Domain.box([[0.0, 1.0]])


def show(rep):
    print(f"{rep.system}:")
    print("  minimal count:", rep.census.count)
    for c in rep.census.components:
        print(f"    {c.classification.label():<14} stability={c.stability}"
              f"  isolated={c.isolated}")
    print("  sample robustness:", [c.verdict for c in rep.robustness])
    print("  consistent with the alternative:", rep.verdict_consistency)
    if rep.global_attraction is not None:
        print("  unique minimal set globally attractive:", rep.global_attraction)
    for n in rep.notes:
        print("  note:", n)
    print()


# constant map: unique stable fixed point, robust everywhere
show(dichotomy_report(constant(0.3), [[0.9], [0.1]], eps0=0.02, levels=3,
                      base_grid=Grid(box, 256)))

# squaring map: the unstable fixed point at 1 breaks robustness, so the
# alternative imposes nothing (and indeed the census is a finite pair)
show(dichotomy_report(square(), [[1.0], [0.5]], eps0=0.02, levels=3,
                      base_grid=Grid(box, 256)))

# identity: satisfies the infinite-census conclusion without being robust,
# so the report calls out that the converse of the alternative fails
show(dichotomy_report(identity_map(), [[0.5]], eps0=0.04, levels=3,
                      base_grid=Grid(box, 128)))
