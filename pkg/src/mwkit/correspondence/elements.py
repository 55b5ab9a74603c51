"""Sampled elements of C(K) and of the path-indexed correspondence modules.

A ``SampleGrid`` fixes finitely many points on each K_v.  An order-k
element is stored as one flat complex array, laid out block by block over
the paths of length k (lexicographic order); the block of alpha holds the
values at the samples of K_r(alpha_k).  Inadmissible pairs have no storage,
so they are zero by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from scipy.spatial import cKDTree

from ..attractor import InvariantList
from ..errors import GridMismatch
from ..geometry import TaggedBoxSet
from ..graph_core import paths_of_length
from ..mw_graph import MWGraph


@dataclass(eq=False)
class SampleGrid:
    """Per-vertex sample points on an invariant list.

    ``resolution`` is the largest distance from a point of K_v to the
    nearest sample that the grid promises; it is the cell diameter when
    the samples are cell centres.
    """

    mw: MWGraph
    K: InvariantList
    points: dict
    resolution: float
    _push: dict = field(default_factory=dict, repr=False)
    _layouts: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_cells(cls, mw: MWGraph, K: InvariantList) -> "SampleGrid":
        return cls(mw, K, {v: K[v].centers for v in mw.graph.vertices}, K.cell_diameter)

    @classmethod
    def from_points(cls, mw: MWGraph, K: InvariantList, points: dict,
                    resolution: Optional[float] = None) -> "SampleGrid":
        pts = {v: np.atleast_2d(np.asarray(points[v], dtype=float)) for v in mw.graph.vertices}
        if resolution is None:
            resolution = max(float(K[v].distance_to(pts[v]).max()) for v in pts) + K.cell_diameter
        return cls(mw, K, pts, resolution)

    @property
    def vertices(self):
        return self.mw.graph.vertices

    @cached_property
    def counts(self) -> dict:
        return {v: len(self.points[v]) for v in self.vertices}

    @cached_property
    def offsets(self) -> dict:
        out, start = {}, 0
        for v in self.vertices:
            out[v] = slice(start, start + self.counts[v])
            start += self.counts[v]
        return out

    @property
    def size(self) -> int:
        return sum(self.counts.values())

    @cached_property
    def _trees(self) -> dict:
        return {v: cKDTree(self.points[v]) for v in self.vertices}

    def nearest(self, vertex: str, pts) -> tuple:
        """(indices into the samples of ``vertex``, distances)."""
        dist, idx = self._trees[vertex].query(np.atleast_2d(pts))
        return idx, dist

    def sample_vertex(self) -> np.ndarray:
        return np.concatenate([[v] * self.counts[v] for v in self.vertices])

    def all_points(self) -> np.ndarray:
        return np.concatenate([self.points[v] for v in self.vertices])

    def cell_of(self, vertex: str, pts) -> TaggedBoxSet:
        """Cells of the K_vertex grid that contain the given points."""
        cover = self.K[vertex]
        idx = np.floor((np.atleast_2d(pts) - np.asarray(cover.origin)) / cover.h).astype(np.int64)
        idx = np.clip(idx, 0, np.asarray(cover.shape) - 1)
        return TaggedBoxSet.from_indices(vertex, cover.origin, cover.h, cover.shape, idx)

    def layout(self, k: int) -> tuple:
        """(paths, {path: slice}, total length) for order-k elements."""
        if k not in self._layouts:
            g = self.mw.graph
            paths = paths_of_length(g, k)
            slices, start = {}, 0
            for a in paths:
                m = self.counts[g.r(a[-1])]
                slices[a] = slice(start, start + m)
                start += m
            self._layouts[k] = (paths, slices, start)
        return self._layouts[k]

    def push(self, path: tuple) -> tuple:
        """Nearest samples of K_s(path) to phi_path(samples of K_r(path)).

        Returns (indices, distances); cached per path.
        """
        if path not in self._push:
            g = self.mw.graph
            src = self.points[g.r(path[-1])]
            self._push[path] = self.nearest(g.s(path[0]), self.mw.compose(path)(src))
        return self._push[path]

    def push_slack(self, k: int) -> float:
        """Largest nearest-sample distance used by order-k left actions."""
        paths = self.layout(k)[0]
        return max(float(self.push(a)[1].max()) for a in paths)


def _check_grid(*items):
    grids = {id(x.grid) for x in items}
    if len(grids) != 1:
        raise GridMismatch("elements live on different sample grids")


@dataclass(eq=False)
class AlgebraElement:
    """A function on K, sampled on every vertex of the grid."""

    grid: SampleGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex).reshape(-1)
        if self.values.size != self.grid.size:
            raise GridMismatch(f"expected {self.grid.size} values, got {self.values.size}")
        if not np.isfinite(self.values).all():
            raise ValueError("algebra elements must be finite")

    @classmethod
    def constant(cls, grid: SampleGrid, c: complex = 1.0) -> "AlgebraElement":
        return cls(grid, np.full(grid.size, c, dtype=complex))

    @classmethod
    def from_function(cls, grid: SampleGrid, fn: Callable) -> "AlgebraElement":
        """``fn(points, vertex) -> values`` evaluated on each vertex's samples."""
        parts = [np.broadcast_to(np.asarray(fn(grid.points[v], v), dtype=complex), (grid.counts[v],))
                 for v in grid.vertices]
        return cls(grid, np.concatenate(parts))

    @classmethod
    def random(cls, grid: SampleGrid, rng: np.random.Generator) -> "AlgebraElement":
        return cls(grid, _random_complex(rng, grid.size))

    def on(self, vertex: str) -> np.ndarray:
        return self.values[self.grid.offsets[vertex]]

    def at(self, vertex: str, pts) -> np.ndarray:
        """Nearest-sample evaluation at arbitrary points of K_vertex."""
        idx, _ = self.grid.nearest(vertex, pts)
        return self.on(vertex)[idx]

    def conj(self) -> "AlgebraElement":
        return AlgebraElement(self.grid, self.values.conj())

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            _check_grid(self, other)
            return AlgebraElement(self.grid, self.values * other.values)
        return AlgebraElement(self.grid, self.values * other)

    __rmul__ = __mul__

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        _check_grid(self, other)
        return AlgebraElement(self.grid, self.values + other.values)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        _check_grid(self, other)
        return AlgebraElement(self.grid, self.values - other.values)

    def sup(self) -> float:
        return float(np.abs(self.values).max()) if self.values.size else 0.0


@dataclass(eq=False)
class CorrElement:
    """An element of the order-k tensor power, sampled on admissible pairs."""

    grid: SampleGrid
    order: int
    values: np.ndarray

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        self.values = np.asarray(self.values, dtype=complex).reshape(-1)
        total = self.grid.layout(self.order)[2]
        if self.values.size != total:
            raise GridMismatch(f"expected {total} values, got {self.values.size}")
        if not np.isfinite(self.values).all():
            raise ValueError("module elements must be finite")

    @classmethod
    def zeros(cls, grid: SampleGrid, order: int = 1) -> "CorrElement":
        return cls(grid, order, np.zeros(grid.layout(order)[2], dtype=complex))

    @classmethod
    def basis(cls, grid: SampleGrid, path) -> "CorrElement":
        """delta_alpha: 1 on (alpha, x) for every sample x, 0 elsewhere."""
        path = tuple(np.atleast_1d(path).tolist())
        out = cls.zeros(grid, len(path))
        out.values[grid.layout(len(path))[1][path]] = 1.0
        return out

    @classmethod
    def from_function(cls, grid: SampleGrid, order: int, fn: Callable) -> "CorrElement":
        """``fn(path, points) -> values`` evaluated block by block."""
        g = grid.mw.graph
        paths, slices, total = grid.layout(order)
        vals = np.zeros(total, dtype=complex)
        for a in paths:
            pts = grid.points[g.r(a[-1])]
            vals[slices[a]] = np.broadcast_to(np.asarray(fn(a, pts), dtype=complex), (len(pts),))
        return cls(grid, order, vals)

    @classmethod
    def random(cls, grid: SampleGrid, rng: np.random.Generator, order: int = 1) -> "CorrElement":
        return cls(grid, order, _random_complex(rng, grid.layout(order)[2]))

    def block(self, path) -> np.ndarray:
        return self.values[self.grid.layout(self.order)[1][tuple(path)]]

    def __add__(self, other: "CorrElement") -> "CorrElement":
        _check_grid(self, other)
        return CorrElement(self.grid, self.order, self.values + other.values)

    def __sub__(self, other: "CorrElement") -> "CorrElement":
        _check_grid(self, other)
        return CorrElement(self.grid, self.order, self.values - other.values)

    def __mul__(self, c) -> "CorrElement":
        return CorrElement(self.grid, self.order, self.values * c)

    __rmul__ = __mul__

    def sup(self) -> float:
        return float(np.abs(self.values).max()) if self.values.size else 0.0


def _random_complex(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)

