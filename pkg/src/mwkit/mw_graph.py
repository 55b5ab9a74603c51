"""Mauldin-Williams graphs with affine edge contractions.

Each edge ``e`` carries an affine map from the ambient box of ``r(e)`` into the
ambient box of ``s(e)``.  Two-sided Lipschitz bounds are derived from the
singular values of the linear part, never taken from the user.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NotACycle, TagMismatch, ValidationError
from .geometry import Box, TaggedBoxSet, TaggedPointCloud, box_corners, cells_meeting
from .graph_core import DirectedGraph, validate_graph

# containment slack for the range check, absolute in ambient coordinates
RANGE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class AffineMap:
    """x -> A x + b on R^d."""

    matrix: np.ndarray
    offset: np.ndarray

    @classmethod
    def make(cls, matrix, offset) -> "AffineMap":
        a = np.atleast_2d(np.asarray(matrix, dtype=float))
        b = np.atleast_1d(np.asarray(offset, dtype=float))
        if a.shape != (b.size, b.size):
            raise DimensionMismatch(f"matrix {a.shape} does not match offset of length {b.size}")
        a.setflags(write=False)
        b.setflags(write=False)
        return cls(a, b)

    @classmethod
    def identity(cls, d: int) -> "AffineMap":
        return cls.make(np.eye(d), np.zeros(d))

    @property
    def dim(self) -> int:
        return self.offset.size

    @cached_property
    def singular_values(self) -> np.ndarray:
        return np.linalg.svd(self.matrix, compute_uv=False)

    @property
    def c_lo(self) -> float:
        return float(self.singular_values.min())

    @property
    def c_hi(self) -> float:
        return float(self.singular_values.max())

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.matrix.T + self.offset

    def then(self, inner: "AffineMap") -> "AffineMap":
        """self o inner."""
        return AffineMap.make(self.matrix @ inner.matrix, self.matrix @ inner.offset + self.offset)

    def inverse(self) -> "AffineMap":
        inv = np.linalg.inv(self.matrix)
        return AffineMap.make(inv, -inv @ self.offset)

    def image_box(self, lo, hi):
        """Exact bounding boxes of the images of boxes given by (N, d) bounds."""
        corners = self(box_corners(np.atleast_2d(lo), np.atleast_2d(hi)))
        return corners.min(axis=1), corners.max(axis=1)

    def __eq__(self, other):
        return (isinstance(other, AffineMap) and np.array_equal(self.matrix, other.matrix)
                and np.array_equal(self.offset, other.offset))

    __hash__ = None


AffineContraction = AffineMap


@dataclass(frozen=True, eq=False)
class MWGraph:
    graph: DirectedGraph
    ambient: dict
    maps: tuple

    @property
    def dim(self) -> int:
        return self.maps[0].dim

    @property
    def n_edges(self) -> int:
        return self.graph.n_edges

    @cached_property
    def diameter(self) -> float:
        """Largest ambient diameter, the D of the stopping bounds."""
        return max(box.diameter for box in self.ambient.values())

    def grid(self, vertex: str, h: float):
        box = self.ambient[vertex]
        return tuple(box.lo), box.grid_shape(h)

    def full(self, vertex: str, h: float) -> TaggedBoxSet:
        return TaggedBoxSet.full(vertex, self.ambient[vertex], h)

    def compose(self, path: Sequence[int]) -> AffineMap:
        """phi_{a1} o ... o phi_{an}."""
        path = self.graph.check_path(path)
        out = self.maps[path[0]]
        for e in path[1:]:
            out = out.then(self.maps[e])
        return out

    def path_ratio(self, path: Sequence[int]) -> float:
        return float(np.prod([self.maps[e].c_hi for e in path]))


def validate_mw(vertices: Sequence, edges: Sequence) -> MWGraph:
    """Validate a raw system description.

    ``vertices`` holds ``(id, lo, hi)`` triples (the ambient boxes) and
    ``edges`` holds ``(name, source, range, matrix, offset)`` tuples.
    """
    issues = []
    try:
        graph = validate_graph([v for v, _, _ in vertices], [e[:3] for e in edges])
    except ValidationError as err:
        issues.extend(err.issues)
        graph = None
    ambient = {}
    for v, lo, hi in vertices:
        try:
            ambient[str(v)] = Box.from_arrays(np.atleast_1d(lo), np.atleast_1d(hi))
        except (ValueError, DimensionMismatch):
            issues.append(("BadAmbientBox", str(v)))
    dims = {box.dim for box in ambient.values()}
    if len(dims) > 1:
        issues.append(("DimensionMismatch", "ambient boxes"))
    d = dims.pop() if len(dims) == 1 else None
    maps = []
    for name, src, rng, matrix, offset in edges:
        name = str(name)
        try:
            phi = AffineMap.make(matrix, offset)
        except (DimensionMismatch, ValueError):
            issues.append(("DimensionMismatch", name))
            continue
        if d is not None and phi.dim != d:
            issues.append(("DimensionMismatch", name))
            continue
        maps.append(phi)
        if phi.c_hi >= 1:
            issues.append(("NotContraction", name))
        if phi.c_lo <= 1e-14:
            issues.append(("NotInjective", name))
        src, rng = str(src), str(rng)
        if src in ambient and rng in ambient and d is not None:
            dom = ambient[rng]
            lo, hi = phi.image_box(np.asarray(dom.lo)[None], np.asarray(dom.hi)[None])
            if not ambient[src].contains(Box.from_arrays(lo[0], hi[0]), RANGE_TOL):
                issues.append(("RangeEscapesAmbient", name))
    if issues:
        raise ValidationError(issues)
    return MWGraph(graph, ambient, tuple(maps))


def global_ratio(mw: MWGraph) -> tuple:
    """(c1, c): smallest lower and largest upper Lipschitz bound over edges."""
    return (min(m.c_lo for m in mw.maps), max(m.c_hi for m in mw.maps))


def image_covering(mw: MWGraph, phi: AffineMap, cover: TaggedBoxSet, target: str) -> TaggedBoxSet:
    """Outer covering, on the grid of ``target``, of phi applied to ``cover``."""
    lo, hi = phi.image_box(cover.lo, cover.hi)
    origin, shape = mw.grid(target, cover.h)
    flat = cells_meeting(origin, cover.h, shape, lo, hi)
    return TaggedBoxSet(target, origin, cover.h, shape, flat)


def apply_edge(mw: MWGraph, e: int, s):
    """Push a covering, point cloud or bare point forward along edge ``e``."""
    phi = mw.maps[e]
    if isinstance(s, TaggedBoxSet):
        if s.vertex != mw.graph.r(e):
            raise TagMismatch(f"edge {e} expects vertex {mw.graph.r(e)}, got {s.vertex}")
        return image_covering(mw, phi, s, mw.graph.s(e))
    if isinstance(s, TaggedPointCloud):
        if s.vertex != mw.graph.r(e):
            raise TagMismatch(f"edge {e} expects vertex {mw.graph.r(e)}, got {s.vertex}")
        return TaggedPointCloud(mw.graph.s(e), phi(s.points))
    return phi(s)


def fixed_point(mw: MWGraph, path: Sequence[int]) -> np.ndarray:
    """Unique fixed point of the composite map along a cycle."""
    path = mw.graph.check_path(path)
    if mw.graph.s(path[0]) != mw.graph.r(path[-1]):
        raise NotACycle(f"{path} is not a cycle")
    phi = mw.compose(path)
    return np.linalg.solve(np.eye(phi.dim) - phi.matrix, phi.offset)
