"""Catalog of concrete discrete-time systems with rigorous cell images.

Each system is a self-map f(x, u) of its compact domain with a finite
control set U (a singleton tuple for uncontrolled maps) and a global
Lipschitz constant valid uniformly over domain x U.  Cell images are
over-approximated by a Lipschitz ball around the image of the cell center,
which is sound for every catalog map.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ControlError, SelfMapError
from .geometry import CellSet, Domain, Grid

# relative inflation of Lipschitz ball radii; absorbs float rounding in
# products so that sampled points can never fall outside the computed ball
_RADIUS_SAFETY = 1.0 + 1e-9


@dataclass(frozen=True, eq=False)
class System:
    """A named self-map of a compact domain with finite control set."""

    name: str
    domain: Domain
    params: dict
    controls: tuple
    lipschitz: float
    map_fn: Callable = field(repr=False)   # (points (m,d), u) -> (m,d)

    @property
    def multivalued(self) -> bool:
        return len(self.controls) > 1

    def _resolve_control(self, u):
        if u is None:
            if self.multivalued:
                raise ControlError(f"{self.name}: control value required")
            return self.controls[0]
        if not any(u == c for c in self.controls):
            raise ControlError(f"{self.name}: control {u!r} not in control set")
        return u

    def image_points(self, points: np.ndarray, u) -> np.ndarray:
        """Vectorized raw evaluation; no domain checks."""
        out = self.map_fn(np.asarray(points, dtype=float), u)
        if self.domain.kind == "circle":
            out = out % 1.0
        return out

    def image_point(self, x, u=None) -> np.ndarray:
        """Evaluate f(x, u) with full domain/control checking."""
        u = self._resolve_control(u)
        p = self.domain.canon(x)
        if not self.domain.contains(p):
            raise SelfMapError(f"{self.name}: input {p!r} outside domain")
        y = self.image_points(p[None, :], u)[0]
        if not self.domain.contains(y):
            raise SelfMapError(
                f"{self.name}: f({p!r}, {u!r}) = {y!r} left the domain"
            )
        return y


def image_point(sys: System, x, u=None) -> np.ndarray:
    return sys.image_point(x, u)


def image_cell(sys: System, cell: int, grid: Grid) -> CellSet:
    """Cells guaranteed to contain f(x, u) for every x in the cell, u in U.

    Union over u of the cells touching the closed ball of radius
    L * cell_radius around f(center, u).
    """
    center = grid.cell_center(cell)
    rho = sys.lipschitz * (grid.cell_diameter / 2.0) * _RADIUS_SAFETY
    mask = np.zeros(grid.n_cells, dtype=bool)
    for u in sys.controls:
        p = sys.image_points(center[None, :], u)[0]
        mask[grid.cells_touching_ball(p, rho)] = True
    return CellSet(grid, mask.reshape(grid.shape))


def _check_self_map(sys: System, samples: int = 64):
    """Construction-time sampled self-map check (corners + interior grid)."""
    d = sys.domain.ndim
    lo, hi = sys.domain.bounds[:, 0], sys.domain.bounds[:, 1]
    ticks = np.linspace(0.0, 1.0, max(2, int(round(samples ** (1.0 / d)))))
    axes = [lo[k] + ticks * (hi[k] - lo[k]) for k in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    for u in sys.controls:
        out = sys.image_points(pts, u)
        if sys.domain.kind == "circle":
            continue
        if np.any(out < lo[None, :] - 0.0) or np.any(out > hi[None, :] + 0.0):
            bad = pts[np.argmax(np.any((out < lo) | (out > hi), axis=1))]
            raise SelfMapError(
                f"{sys.name}: f({bad!r}, {u!r}) leaves the domain"
            )
    return sys


# --------------------------------------------------------------------------
# catalog
# --------------------------------------------------------------------------

def rotation(theta: float) -> System:
    """Circle rotation x -> (x + theta) mod 1; isometry, L = 1."""
    th = float(theta)

    def f(pts, u):
        return (pts + th) % 1.0

    return System("rotation", Domain.circle(), {"theta": th}, (None,), 1.0, f)


def square() -> System:
    """x -> x^2 on [0, 1]; L = 2."""

    def f(pts, u):
        return pts * pts

    return _check_self_map(
        System("square", Domain.box([[0, 1]]), {}, (None,), 2.0, f)
    )


def identity_map() -> System:
    """x -> x on [0, 1]; L = 1."""

    def f(pts, u):
        return pts.copy()

    return System("identity", Domain.box([[0, 1]]), {}, (None,), 1.0, f)


def logistic(r: float) -> System:
    """x -> r*x*(1-x) on [0, 1], r in (0, 4]; L = r."""
    r = float(r)
    if not 0.0 < r <= 4.0:
        raise ValueError("logistic parameter r must be in (0, 4]")

    def f(pts, u):
        out = r * pts * (1.0 - pts)
        return np.clip(out, 0.0, 1.0)   # guards float dust at r = 4, x = 0.5

    return _check_self_map(
        System("logistic", Domain.box([[0, 1]]), {"r": r}, (None,), r, f)
    )


def constant(c: float) -> System:
    """x -> c on [0, 1]; L = 0."""
    c = float(c)
    if not 0.0 <= c <= 1.0:
        raise ValueError("constant value must lie in [0, 1]")

    def f(pts, u):
        return np.full_like(pts, c)

    return System("constant", Domain.box([[0, 1]]), {"c": c}, (None,), 0.0, f)


def affine2d(m, b, bounds=((0.0, 1.0), (0.0, 1.0))) -> System:
    """x -> M x + b on a box in R^2; L = spectral norm of M.

    Self-map is checked exactly at construction: the affine image of a box is
    the convex hull of its corner images.
    """
    m = np.asarray(m, dtype=float).reshape(2, 2)
    b = np.asarray(b, dtype=float).reshape(2)
    dom = Domain.box(bounds)
    lo, hi = dom.bounds[:, 0], dom.bounds[:, 1]
    corners = np.array([[lo[0], lo[1]], [lo[0], hi[1]],
                        [hi[0], lo[1]], [hi[0], hi[1]]])
    img = corners @ m.T + b[None, :]
    if np.any(img < lo[None, :]) or np.any(img > hi[None, :]):
        raise SelfMapError("affine2d: image of the domain leaves the domain")

    def f(pts, u):
        return pts @ m.T + b[None, :]

    lip = float(np.linalg.norm(m, 2))
    return System("affine2d", dom, {"m": m.tolist(), "b": b.tolist()},
                  (None,), lip, f)


def drift_control(a: float, controls=(-0.1, 0.0, 0.1)) -> System:
    """x -> a*x + u on [-1, 1] with finite control set; L = |a|."""
    a = float(a)
    controls = tuple(float(u) for u in controls)
    if abs(a) + max(abs(u) for u in controls) > 1.0:
        raise SelfMapError("drift_control: |a| + max|u| must be <= 1")

    def f(pts, u):
        return a * pts + u

    return System("drift_control", Domain.box([[-1, 1]]),
                  {"a": a, "controls": list(controls)}, controls, abs(a), f)


CATALOG = {
    "rotation": rotation,
    "square": square,
    "identity": identity_map,
    "logistic": logistic,
    "constant": constant,
    "affine2d": affine2d,
    "drift_control": drift_control,
}


def make_system(name: str, params: dict | None = None) -> System:
    """Instantiate a catalog system by name and parameter map (CLI entry)."""
    if name not in CATALOG:
        raise ValueError(f"unknown system {name!r}; catalog: {sorted(CATALOG)}")
    return CATALOG[name](**(params or {}))
