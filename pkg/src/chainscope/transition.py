"""Fattened transition graphs on grids and reachability over them.

The graph realizes one step of the eps-perturbed dynamics at cell
granularity: cell c has an edge to every cell touching the eps-fattening of
the rigorous image of c.  Edges therefore over-approximate the perturbed
map restricted to the cell, for every point of the cell and every control.

In one dimension the successor set of a (cell, control) pair is a contiguous
index range, so the graph is stored as per-control (lo, hi) range arrays and
set-valued steps run as difference-array sweeps in O(n).  Two-dimensional
graphs use an explicit sparse boolean matrix.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import EmptySetError, ResolutionError, ResourceLimitError
from .geometry import CellSet, Grid
from .systems import System, _RADIUS_SAFETY

MAX_EXPLICIT_EDGES = 200_000_000


class _RangeGraph:
    """1-D successor ranges: per control, successors(c) = [lo[c], hi[c]].

    On the circle the range is stored unwrapped (lo may be negative, hi may
    exceed n-1); membership is taken modulo n.  Ranges always have length
    between 1 and n.
    """

    def __init__(self, n: int, lo: np.ndarray, hi: np.ndarray, wrap: bool):
        self.n = n
        self.lo = lo     # (n, n_controls) int64
        self.hi = hi
        self.wrap = wrap

    def successors(self, c: int) -> np.ndarray:
        outs = []
        for j in range(self.lo.shape[1]):
            rng = np.arange(self.lo[c, j], self.hi[c, j] + 1)
            outs.append(rng % self.n if self.wrap else rng)
        return np.unique(np.concatenate(outs))

    def image_of(self, mask: np.ndarray) -> np.ndarray:
        flat = mask.reshape(-1)
        idx = np.flatnonzero(flat)
        diff = np.zeros(self.n + 1, dtype=np.int64)
        for j in range(self.lo.shape[1]):
            lo = self.lo[idx, j]
            length = self.hi[idx, j] - lo + 1
            if self.wrap:
                starts = lo % self.n
                ends = starts + length
                np.add.at(diff, starts, 1)
                np.add.at(diff, np.minimum(ends, self.n), -1)
                over = ends > self.n
                if over.any():
                    diff[0] += int(np.count_nonzero(over))
                    np.add.at(diff, ends[over] - self.n, -1)
            else:
                np.add.at(diff, lo, 1)
                np.add.at(diff, lo + length, -1)
        return (np.cumsum(diff[: self.n]) > 0).reshape(mask.shape)

    def preimage_of(self, mask: np.ndarray) -> np.ndarray:
        flat = mask.reshape(-1).astype(np.int64)
        prefix = np.concatenate([[0], np.cumsum(flat)])
        hit = np.zeros(self.n, dtype=bool)
        for j in range(self.lo.shape[1]):
            lo = self.lo[:, j]
            length = self.hi[:, j] - lo + 1
            if self.wrap:
                starts = lo % self.n
                ends = starts + length
                wrapped = ends > self.n
                cnt = np.where(
                    wrapped,
                    (prefix[self.n] - prefix[starts])
                    + prefix[np.minimum(ends - self.n, self.n)],
                    prefix[np.minimum(ends, self.n)] - prefix[starts],
                )
            else:
                cnt = prefix[lo + length] - prefix[lo]
            hit |= cnt > 0
        return hit.reshape(mask.shape)

    def self_loops(self) -> np.ndarray:
        cells = np.arange(self.n)
        hit = np.zeros(self.n, dtype=bool)
        for j in range(self.lo.shape[1]):
            if self.wrap:
                length = self.hi[:, j] - self.lo[:, j]
                hit |= (cells - self.lo[:, j]) % self.n <= length
            else:
                hit |= (self.lo[:, j] <= cells) & (cells <= self.hi[:, j])
        return hit

    def edge_count(self) -> int:
        total = 0
        for j in range(self.lo.shape[1]):
            total += int(np.sum(np.minimum(self.hi[:, j] - self.lo[:, j] + 1,
                                           self.n)))
        return total

    def to_csr(self) -> sp.csr_matrix:
        if self.edge_count() > MAX_EXPLICIT_EDGES:
            raise ResourceLimitError("graph too dense to materialize explicitly")
        rows, cols = [], []
        for j in range(self.lo.shape[1]):
            lo = self.lo[:, j]
            length = (self.hi[:, j] - lo + 1).astype(np.int64)
            total = int(length.sum())
            r = np.repeat(np.arange(self.n), length)
            offs = np.arange(total) - np.repeat(
                np.concatenate([[0], np.cumsum(length)[:-1]]), length
            )
            c = np.repeat(lo, length) + offs
            cols.append(c % self.n if self.wrap else c)
            rows.append(r)
        m = sp.coo_matrix(
            (np.ones(sum(r.size for r in rows), dtype=np.uint8),
             (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.n, self.n),
        ).tocsr()
        m.data[:] = 1
        return m


class _CsrGraph:
    """Explicit sparse adjacency (2-D grids)."""

    def __init__(self, matrix: sp.csr_matrix):
        self.m = matrix
        self.n = matrix.shape[0]

    def successors(self, c: int) -> np.ndarray:
        return np.sort(self.m.indices[self.m.indptr[c]:self.m.indptr[c + 1]])

    def image_of(self, mask: np.ndarray) -> np.ndarray:
        vec = mask.reshape(-1).astype(np.uint8)
        return (vec @ self.m > 0).reshape(mask.shape)

    def preimage_of(self, mask: np.ndarray) -> np.ndarray:
        vec = mask.reshape(-1).astype(np.uint8)
        return (self.m @ vec > 0).reshape(mask.shape)

    def self_loops(self) -> np.ndarray:
        return self.m.diagonal().astype(bool)

    def edge_count(self) -> int:
        return int(self.m.nnz)

    def to_csr(self) -> sp.csr_matrix:
        return self.m


class TransitionGraph:
    """One-step over-approximation of the eps-perturbed multifunction."""

    def __init__(self, sys: System, grid: Grid, eps: float, impl):
        self.system = sys
        self.grid = grid
        self.eps = float(eps)
        self._impl = impl

    @property
    def n_cells(self) -> int:
        return self.grid.n_cells

    def successors(self, cell: int) -> np.ndarray:
        return self._impl.successors(int(cell))

    def image_of(self, cells: CellSet) -> CellSet:
        return CellSet(self.grid, self._impl.image_of(cells.mask))

    def preimage_of(self, cells: CellSet) -> CellSet:
        """Cells with at least one successor inside ``cells`` (lower pre-image)."""
        return CellSet(self.grid, self._impl.preimage_of(cells.mask))

    def self_loops(self) -> np.ndarray:
        return self._impl.self_loops().reshape(-1)

    def edge_count(self) -> int:
        return self._impl.edge_count()

    def to_csr(self) -> sp.csr_matrix:
        return self._impl.to_csr()

    def dump_edges(self, fp):
        """Textual edge list 'src -> dst1,dst2,...' sorted by src."""
        for c in range(self.n_cells):
            succ = ",".join(str(int(s)) for s in self.successors(c))
            fp.write(f"{c} -> {succ}\n")


def build_graph(sys: System, grid: Grid, eps: float) -> TransitionGraph:
    """Build the eps-fattened cell transition graph.

    Requires eps >= 4 * cell_diameter so the fattening dominates the
    discretization error; refuses silently unsound builds.
    """
    if eps < 4.0 * grid.cell_diameter * (1.0 - 1e-12):
        raise ResolutionError(
            f"eps={eps:g} below resolution coupling 4*cell_diameter="
            f"{4.0 * grid.cell_diameter:g}"
        )
    centers = grid.centers()
    rho = sys.lipschitz * (grid.cell_diameter / 2.0) * _RADIUS_SAFETY

    if grid.domain.ndim == 1:
        n = grid.n_cells
        k = grid.fatten_offsets(eps)
        n_ctrl = len(sys.controls)
        lo = np.empty((n, n_ctrl), dtype=np.int64)
        hi = np.empty((n, n_ctrl), dtype=np.int64)
        for j, u in enumerate(sys.controls):
            pts = sys.image_points(centers, u)[:, 0]
            i0, i1 = grid.axis_touch_range(pts - rho, pts + rho)
            i0 -= k
            i1 += k
            if grid.wrap:
                too_wide = (i1 - i0 + 1) >= n
                i1 = np.where(too_wide, i0 + n - 1, i1)
            else:
                i0 = np.clip(i0, 0, n - 1)
                i1 = np.clip(i1, 0, n - 1)
            lo[:, j] = i0
            hi[:, j] = i1
        return TransitionGraph(sys, grid, eps, _RangeGraph(n, lo, hi, grid.wrap))

    struct = grid.fatten_offsets(eps)
    pad0, pad1 = struct.shape[0] // 2, struct.shape[1] // 2
    rows, cols = [], []
    from scipy.ndimage import binary_dilation

    shape = grid.shape
    for c in range(grid.n_cells):
        hit = np.zeros(shape, dtype=bool)
        for u in sys.controls:
            p = sys.image_points(centers[c][None, :], u)[0]
            hit.reshape(-1)[grid.cells_touching_ball(p, rho)] = True
        # local window dilation; clipping at the box boundary is exact
        i_idx, j_idx = np.nonzero(hit)
        w0a, w0b = max(i_idx.min() - pad0, 0), min(i_idx.max() + pad0 + 1, shape[0])
        w1a, w1b = max(j_idx.min() - pad1, 0), min(j_idx.max() + pad1 + 1, shape[1])
        window = binary_dilation(hit[w0a:w0b, w1a:w1b], structure=struct)
        wi, wj = np.nonzero(window)
        flat = np.ravel_multi_index((wi + w0a, wj + w1a), shape)
        rows.append(np.full(flat.size, c, dtype=np.int64))
        cols.append(flat)
        if sum(r.size for r in rows) > MAX_EXPLICIT_EDGES:
            raise ResourceLimitError("transition graph exceeds edge cap")
    m = sp.coo_matrix(
        (np.ones(sum(r.size for r in rows), dtype=np.uint8),
         (np.concatenate(rows), np.concatenate(cols))),
        shape=(grid.n_cells, grid.n_cells),
    ).tocsr()
    m.data[:] = 1
    return TransitionGraph(sys, grid, eps, _CsrGraph(m))


def forward_reach(g: TransitionGraph, start: CellSet) -> CellSet:
    """Least fixed point containing start and closed under graph successors."""
    if not start:
        raise EmptySetError("forward_reach from an empty start set")
    reached = start.mask.copy()
    frontier = start.mask.copy()
    while frontier.any():
        img = g._impl.image_of(frontier)
        frontier = img & ~reached
        reached |= frontier
    return CellSet(g.grid, reached)


def forward_reach_depths(g: TransitionGraph, start: CellSet):
    """Forward reach plus per-cell BFS depth (-1 for unreached cells)."""
    if not start:
        raise EmptySetError("forward_reach from an empty start set")
    depths = np.full(g.n_cells, -1, dtype=np.int64)
    depths[start.indices()] = 0
    reached = start.mask.copy()
    frontier = start.mask.copy()
    level = 0
    while frontier.any():
        level += 1
        img = g._impl.image_of(frontier)
        frontier = img & ~reached
        reached |= frontier
        depths[frontier.reshape(-1)] = level
    return CellSet(g.grid, reached), depths


def backward_reach(g: TransitionGraph, target: CellSet) -> CellSet:
    """All cells whose forward reach intersects the target."""
    if not target:
        raise EmptySetError("backward_reach to an empty target set")
    reached = target.mask.copy()
    frontier = target.mask.copy()
    while frontier.any():
        pre = g._impl.preimage_of(frontier)
        frontier = pre & ~reached
        reached |= frontier
    return CellSet(g.grid, reached)


def recurrent_cells(g: TransitionGraph) -> list[CellSet]:
    """Nontrivial strongly connected components of the graph.

    A component is kept when it has at least two cells or a self-loop.
    Components come back disjoint and ordered by their smallest member index.
    """
    csr = g.to_csr()
    _, labels = connected_components(csr, directed=True, connection="strong")
    loops = g.self_loops()
    order = np.argsort(labels, kind="stable")
    sorted_labels = labels[order]
    boundaries = np.flatnonzero(np.diff(sorted_labels)) + 1
    groups = np.split(order, boundaries)
    comps = []
    for members in groups:
        if members.size >= 2 or loops[members[0]]:
            comps.append(np.sort(members))
    comps.sort(key=lambda m: int(m[0]))
    return [CellSet.from_indices(g.grid, m) for m in comps]


def extract_path(g: TransitionGraph, depths: np.ndarray, end_cell: int):
    """Backtrack a BFS path (list of cells) from a depth labelling.

    Returns cells from a depth-0 cell to ``end_cell``; each consecutive pair
    is a graph edge.  Predecessors are chosen deterministically (smallest
    index at the previous depth).
    """
    path = [int(end_cell)]
    cur = int(end_cell)
    d = int(depths[cur])
    if d < 0:
        raise ValueError("end cell was not reached")
    for level in range(d, 0, -1):
        cur_set = CellSet.from_indices(g.grid, [cur])
        preds = g.preimage_of(cur_set).indices()
        preds = preds[depths[preds] == level - 1]
        cur = int(preds[0])
        path.append(cur)
    path.reverse()
    return path


def edge_control(g: TransitionGraph, src: int, dst: int):
    """A control value under which the edge src -> dst exists."""
    impl = g._impl
    if isinstance(impl, _RangeGraph):
        for j, u in enumerate(g.system.controls):
            lo, hi = impl.lo[src, j], impl.hi[src, j]
            if impl.wrap:
                if (dst - lo) % impl.n <= hi - lo:
                    return u
            elif lo <= dst <= hi:
                return u
    else:
        from .systems import image_cell
        from .geometry import fatten
        for u in g.system.controls:
            one = System(g.system.name, g.system.domain, g.system.params,
                         (u,), g.system.lipschitz, g.system.map_fn)
            if dst in fatten(image_cell(one, src, g.grid), g.eps):
                return u
    raise ValueError(f"no edge {src} -> {dst}")
