"""Rectangular grids over box domains, grid functions, and node sets.

Grids are uniform with equal spacing on every axis, in dimension 1 or 2.
A node is a boundary node iff any of its indices is 0 or m-1 on its axis.
Values are stored grid-shaped (C order); the row-major flattening is the
canonical node ordering used everywhere (CSV output, NodeSet indices).
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import ndimage


@dataclass(frozen=True)
class Grid:
    """Uniform lattice over the box [lo, hi] with m nodes per axis."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]
    m: tuple[int, ...]
    h: float

    @property
    def dim(self) -> int:
        return len(self.m)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.m

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.m))

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(
            np.linspace(self.lo[d], self.hi[d], self.m[d]) for d in range(self.dim)
        )

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        for d in range(self.dim):
            sl = [slice(None)] * self.dim
            sl[d] = 0
            mask[tuple(sl)] = True
            sl[d] = -1
            mask[tuple(sl)] = True
        mask.flags.writeable = False
        return mask

    @property
    def interior_mask(self) -> np.ndarray:
        return ~self.boundary_mask

    def coords(self) -> np.ndarray:
        """Node coordinates, shape (*shape, dim)."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def diameter(self) -> float:
        return float(np.hypot.reduce([self.hi[d] - self.lo[d] for d in range(self.dim)]))

    def is_interior(self, node: tuple[int, ...]) -> bool:
        return all(0 < node[d] < self.m[d] - 1 for d in range(self.dim))

    def node_coord(self, node: tuple[int, ...]) -> np.ndarray:
        return np.array([self.lo[d] + node[d] * self.h for d in range(self.dim)])


def build_grid(lo, hi, m) -> Grid:
    """Build a uniform grid; rejects mismatched axes and non-uniform spacing."""
    lo_t = tuple(float(v) for v in np.atleast_1d(lo))
    hi_t = tuple(float(v) for v in np.atleast_1d(hi))
    m_t = tuple(int(v) for v in np.atleast_1d(m))
    if not (len(lo_t) == len(hi_t) == len(m_t)):
        raise ValueError("lo, hi, m must have the same length")
    dim = len(m_t)
    if dim not in (1, 2):
        raise ValueError(f"dimension must be 1 or 2, got {dim}")
    if any(mm < 3 for mm in m_t):
        raise ValueError("need m >= 3 nodes per axis")
    if any(hi_t[d] <= lo_t[d] for d in range(dim)):
        raise ValueError("need lo < hi componentwise")
    spacings = [(hi_t[d] - lo_t[d]) / (m_t[d] - 1) for d in range(dim)]
    h = spacings[0]
    if any(abs(s - h) > 1e-12 * h for s in spacings):
        raise ValueError(f"non-uniform spacing across axes: {spacings}")
    return Grid(lo=lo_t, hi=hi_t, m=m_t, h=h)


def refine(g: Grid) -> Grid:
    """Halve the spacing: same box, 2m-1 nodes per axis."""
    return Grid(lo=g.lo, hi=g.hi, m=tuple(2 * mm - 1 for mm in g.m), h=g.h / 2)


@dataclass(frozen=True)
class GridFunction:
    """Real values on grid nodes.

    Interior values must be finite.  Boundary entries may be NaN for
    interior-only fields (operator values, residuals); ordinary functions
    (solutions, obstacles, data) are finite everywhere.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} != grid shape {self.grid.shape}")
        if np.isinf(vals).any():
            raise ValueError("grid function contains infinities")
        if np.isnan(vals[self.grid.interior_mask]).any():
            raise ValueError("grid function has NaN at interior nodes")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        mesh = np.meshgrid(*grid.axes, indexing="ij")
        return cls(grid, np.asarray(fn(*mesh), dtype=np.float64) * np.ones(grid.shape))

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "GridFunction":
        return cls(grid, np.full(grid.shape, float(c)))

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls.constant(grid, 0.0)

    def max_abs(self) -> float:
        return float(np.nanmax(np.abs(self.values)))

    def interior_max_abs(self) -> float:
        return float(np.max(np.abs(self.values[self.grid.interior_mask])))

    def to_csv(self, path) -> None:
        coords = self.grid.coords().reshape(-1, self.grid.dim)
        vals = self.values.reshape(-1)
        header = ["x", "y"][: self.grid.dim] + ["value"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row, v in zip(coords, vals):
                w.writerow([format(c, ".17g") for c in row] + [format(v, ".17g")])

    @classmethod
    def from_csv(cls, path, grid: Grid | None = None) -> "GridFunction":
        data = np.genfromtxt(path, delimiter=",", skip_header=1)
        data = np.atleast_2d(data)
        dim = data.shape[1] - 1
        vals = data[:, -1]
        if grid is None:
            axes = [np.unique(data[:, d]) for d in range(dim)]
            grid = build_grid([a[0] for a in axes], [a[-1] for a in axes],
                              [len(a) for a in axes])
        if data.shape[0] != grid.n_nodes:
            raise ValueError(f"CSV has {data.shape[0]} rows, grid has {grid.n_nodes} nodes")
        return cls(grid, vals.reshape(grid.shape))


@dataclass(frozen=True)
class NodeSet:
    """Set of node indices (flat, C-order) on a grid."""

    grid: Grid
    indices: frozenset[int]

    def __post_init__(self):
        idx = frozenset(int(i) for i in self.indices)
        n = self.grid.n_nodes
        if any(i < 0 or i >= n for i in idx):
            raise ValueError("node index out of range")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_mask(cls, grid: Grid, mask: np.ndarray) -> "NodeSet":
        flat = np.flatnonzero(np.asarray(mask).reshape(-1))
        return cls(grid, frozenset(int(i) for i in flat))

    @cached_property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.grid.n_nodes, dtype=bool)
        m[list(self.indices)] = True
        m = m.reshape(self.grid.shape)
        m.flags.writeable = False
        return m

    def __len__(self) -> int:
        return len(self.indices)

    def __contains__(self, i: int) -> bool:
        return int(i) in self.indices


def distance_to_set(g: Grid, s: NodeSet) -> GridFunction:
    """Euclidean distance (physical coordinates) to the nearest node of s.

    Exact for the node-to-node metric (scipy's exact Euclidean distance
    transform); zero on s.
    """
    if len(s) == 0:
        raise ValueError("distance to empty node set")
    dist = ndimage.distance_transform_edt(~s.mask, sampling=g.h)
    return GridFunction(g, dist)


def nearest_in_set(g: Grid, s: NodeSet):
    """Distance field plus, per node, the grid index of the nearest set node."""
    if len(s) == 0:
        raise ValueError("distance to empty node set")
    dist, idx = ndimage.distance_transform_edt(~s.mask, sampling=g.h,
                                               return_indices=True)
    return GridFunction(g, dist), idx
