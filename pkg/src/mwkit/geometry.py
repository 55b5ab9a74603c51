"""Compact-set arithmetic in R^d on vertex-tagged grid coverings.

A ``TaggedBoxSet`` is a finite set of closed grid cells of side ``h``; the grid
is anchored at the lower corner of the vertex's ambient box.  Cells are stored
as sorted flat (raveled) indices so set algebra reduces to sorted-array ops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from itertools import product

import numpy as np
from scipy.spatial import cKDTree

from .errors import DimensionMismatch, TagMismatch

# snapping slack, in cell units, when converting coordinates to cell indices
SNAP = 1e-9


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise DimensionMismatch("lo/hi dimension differ")
        if any(a > b for a, b in zip(self.lo, self.hi)):
            raise ValueError(f"empty box {self.lo} {self.hi}")

    @classmethod
    def from_arrays(cls, lo, hi) -> "Box":
        return cls(tuple(float(x) for x in lo), tuple(float(x) for x in hi))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def extent(self) -> np.ndarray:
        return np.asarray(self.hi) - np.asarray(self.lo)

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.extent))

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.lo) + np.asarray(self.hi)) / 2

    def corners(self) -> np.ndarray:
        return np.array(list(product(*zip(self.lo, self.hi))), dtype=float)

    def contains(self, other: "Box", tol: float = 0.0) -> bool:
        return all(a - tol <= b for a, b in zip(self.lo, other.lo)) and all(
            b <= a + tol for a, b in zip(self.hi, other.hi)
        )

    def grid_shape(self, h: float) -> tuple:
        return tuple(max(1, math.ceil(x / h - SNAP)) for x in self.extent)


def box_corners(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Corners of many boxes: (N, d) bounds -> (N, 2**d, d)."""
    d = lo.shape[1]
    pick = np.array(list(product((0, 1), repeat=d)), dtype=bool)
    return np.where(pick[None, :, :], hi[:, None, :], lo[:, None, :])


def box_gap(lo1, hi1, lo2, hi2) -> np.ndarray:
    """Euclidean distance between closed boxes, elementwise over leading axes."""
    sep = np.maximum(0.0, np.maximum(lo1 - hi2, lo2 - hi1))
    return np.sqrt((sep ** 2).sum(axis=-1))


@dataclass(frozen=True, eq=False)
class TaggedBoxSet:
    vertex: str
    origin: tuple
    h: float
    shape: tuple
    flat: np.ndarray

    def __post_init__(self):
        if self.flat.size == 0:
            raise ValueError(f"empty covering for vertex {self.vertex}")

    # construction -------------------------------------------------------

    @classmethod
    def from_indices(cls, vertex, origin, h, shape, indices) -> "TaggedBoxSet":
        indices = np.asarray(indices, dtype=np.int64).reshape(-1, len(shape))
        flat = np.unique(np.ravel_multi_index(tuple(indices.T), shape))
        return cls(str(vertex), tuple(float(x) for x in origin), float(h), tuple(shape), flat)

    @classmethod
    def from_flat(cls, vertex, origin, h, shape, flat) -> "TaggedBoxSet":
        return cls(str(vertex), tuple(origin), float(h), tuple(shape),
                   np.unique(np.asarray(flat, dtype=np.int64)))

    @classmethod
    def full(cls, vertex, ambient: Box, h: float) -> "TaggedBoxSet":
        shape = ambient.grid_shape(h)
        return cls(str(vertex), tuple(ambient.lo), float(h), shape,
                   np.arange(int(np.prod(shape)), dtype=np.int64))

    def like(self, flat) -> "TaggedBoxSet":
        """Same grid, different cells."""
        return TaggedBoxSet.from_flat(self.vertex, self.origin, self.h, self.shape, flat)

    # geometry -----------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.shape)

    def __len__(self) -> int:
        return int(self.flat.size)

    @cached_property
    def indices(self) -> np.ndarray:
        return np.stack(np.unravel_index(self.flat, self.shape), axis=1).astype(np.int64)

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.origin) + self.indices * self.h

    @property
    def hi(self) -> np.ndarray:
        return self.lo + self.h

    @property
    def centers(self) -> np.ndarray:
        return self.lo + self.h / 2

    @property
    def cell_diameter(self) -> float:
        return self.h * math.sqrt(self.dim)

    def bounding_box(self) -> Box:
        return Box.from_arrays(self.lo.min(axis=0), self.hi.max(axis=0))

    @cached_property
    def _tree(self) -> cKDTree:
        return cKDTree(self.centers)

    def same_grid(self, other: "TaggedBoxSet") -> bool:
        return (self.shape == other.shape and math.isclose(self.h, other.h)
                and np.allclose(self.origin, other.origin))

    def __eq__(self, other) -> bool:
        if not isinstance(other, TaggedBoxSet):
            return NotImplemented
        return (self.vertex == other.vertex and self.same_grid(other)
                and np.array_equal(self.flat, other.flat))

    __hash__ = None

    def __repr__(self) -> str:
        return f"TaggedBoxSet(vertex={self.vertex!r}, h={self.h:.3g}, cells={len(self)})"

    # set algebra on a shared grid -----------------------------------------

    def _check(self, other):
        if self.vertex != other.vertex:
            raise TagMismatch(f"{self.vertex} != {other.vertex}")
        if not self.same_grid(other):
            raise DimensionMismatch("box sets live on different grids")

    def union(self, other) -> "TaggedBoxSet":
        self._check(other)
        return self.like(np.union1d(self.flat, other.flat))

    def intersection(self, other):
        """Cells common to both, or None when there are none."""
        self._check(other)
        common = np.intersect1d(self.flat, other.flat, assume_unique=True)
        return self.like(common) if common.size else None

    def issubset(self, other) -> bool:
        self._check(other)
        return bool(np.isin(self.flat, other.flat, assume_unique=True).all())

    def dilate(self, cells: int = 1) -> "TaggedBoxSet":
        """Grow by ``cells`` in every direction (Chebyshev neighbourhood)."""
        offs = np.array(list(product(range(-cells, cells + 1), repeat=self.dim)))
        idx = (self.indices[:, None, :] + offs[None]).reshape(-1, self.dim)
        keep = ((idx >= 0) & (idx < np.asarray(self.shape))).all(axis=1)
        return TaggedBoxSet.from_indices(self.vertex, self.origin, self.h, self.shape, idx[keep])

    # points ---------------------------------------------------------------

    def distance_to(self, points) -> np.ndarray:
        """Exact Euclidean distance from each point to the union of closed cells."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dim:
            raise DimensionMismatch("point dimension differs from covering")
        nearest, _ = self._tree.query(pts)
        out = np.empty(len(pts))
        lo, hi = self.lo, self.hi
        for i, (p, dc) in enumerate(zip(pts, nearest)):
            cand = self._tree.query_ball_point(p, dc + self.cell_diameter / 2 + 1e-15)
            gaps = box_gap(p[None], p[None], lo[cand], hi[cand])
            out[i] = gaps.min()
        return out

    def cells_meeting(self, lo, hi) -> np.ndarray:
        """Flat indices of grid cells whose interior meets one of the boxes.

        Degenerate boxes still claim the cell containing them, so the result
        always covers every box (clipped to the grid).
        """
        return cells_meeting(self.origin, self.h, self.shape, lo, hi)


def cells_meeting(origin, h, shape, lo, hi) -> np.ndarray:
    lo = np.atleast_2d(np.asarray(lo, dtype=float))
    hi = np.atleast_2d(np.asarray(hi, dtype=float))
    top = np.asarray(shape) - 1
    o = np.asarray(origin)
    ilo = np.floor((lo - o) / h + SNAP).astype(np.int64)
    ihi = np.ceil((hi - o) / h - SNAP).astype(np.int64) - 1
    ihi = np.maximum(ihi, ilo)
    ilo = np.clip(ilo, 0, top)
    ihi = np.clip(ihi, 0, top)
    span = ihi - ilo + 1
    m = span.max(axis=0)
    offs = np.stack(np.meshgrid(*[np.arange(k) for k in m], indexing="ij"), -1).reshape(-1, len(m))
    chunk = max(1, 4_000_000 // len(offs))
    parts = []
    for s in range(0, len(ilo), chunk):
        base = ilo[s:s + chunk, None, :] + offs[None]
        ok = (offs[None] < span[s:s + chunk, None, :]).all(axis=2)
        idx = base[ok]
        parts.append(np.ravel_multi_index(tuple(idx.T), shape))
    return np.unique(np.concatenate(parts))


@dataclass(frozen=True, eq=False)
class TaggedPointCloud:
    vertex: str
    points: np.ndarray

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.points)


def _centers_or_points(a):
    return a.centers if isinstance(a, TaggedBoxSet) else np.asarray(a.points, dtype=float)


def hausdorff_distance(a, b) -> float:
    """Hausdorff distance between two tagged sets of the same kind.

    Box sets are compared through their cell centres, which is a metric on
    cell sets and differs from the distance between the closed unions by at
    most half a cell diameter.
    """
    if type(a) is not type(b):
        raise TypeError("both arguments must be the same kind of tagged set")
    if a.vertex != b.vertex:
        raise TagMismatch(f"{a.vertex} != {b.vertex}")
    if a.dim != b.dim:
        raise DimensionMismatch(f"{a.dim} != {b.dim}")
    pa, pb = _centers_or_points(a), _centers_or_points(b)
    if isinstance(a, TaggedBoxSet) and a.same_grid(b) and np.array_equal(a.flat, b.flat):
        return 0.0
    d_ab, _ = cKDTree(pb).query(pa)
    d_ba, _ = cKDTree(pa).query(pb)
    return float(max(d_ab.max(), d_ba.max()))


def min_separation(a: TaggedBoxSet, b: TaggedBoxSet) -> float:
    """Minimum distance between the closed cell unions (0 iff they touch)."""
    if a.vertex != b.vertex:
        raise TagMismatch(f"{a.vertex} != {b.vertex}")
    if a.dim != b.dim:
        raise DimensionMismatch(f"{a.dim} != {b.dim}")
    ca, cb = a.centers, b.centers
    tb = cKDTree(cb)
    dc, _ = tb.query(ca)
    # any minimising pair has centre distance <= best centre gap + both half-diagonals
    reach = dc.min() + (a.cell_diameter + b.cell_diameter) / 2 + 1e-12
    pairs = cKDTree(ca).query_ball_tree(tb, reach)
    ia = np.repeat(np.arange(len(ca)), [len(p) for p in pairs])
    ib = np.fromiter((j for p in pairs for j in p), dtype=np.int64, count=len(ia))
    return float(box_gap(a.lo[ia], a.hi[ia], b.lo[ib], b.hi[ib]).min())


def refine(a: TaggedBoxSet, factor: int) -> TaggedBoxSet:
    """Split every cell into ``factor**d`` children on the finer grid."""
    if factor < 2:
        raise ValueError("factor must be >= 2")
    offs = np.array(list(product(range(factor), repeat=a.dim)))
    idx = (a.indices[:, None, :] * factor + offs[None]).reshape(-1, a.dim)
    shape = tuple(s * factor for s in a.shape)
    return TaggedBoxSet.from_indices(a.vertex, a.origin, a.h / factor, shape, idx)


def coarsen(a: TaggedBoxSet, factor: int) -> TaggedBoxSet:
    """Parent cells on the grid that is ``factor`` times coarser."""
    if factor < 2:
        raise ValueError("factor must be >= 2")
    shape = tuple(-(-s // factor) for s in a.shape)
    return TaggedBoxSet.from_indices(a.vertex, a.origin, a.h * factor, shape, a.indices // factor)
