"""Cylinders, the coding map and inverse coding (addresses).

The coding map is evaluated only through cylinder images: for a prefix
alpha, pi(alpha...) lies in phi_alpha(K_r(alpha)), whose size is bounded by the
product of the edge ratios along alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .attractor import InvariantList
from .errors import ChainMismatch, InvalidPath, PointNotOnAttractor, PrefixTooShort
from .geometry import Box, TaggedBoxSet, box_gap, cells_meeting
from .graph_core import paths_from
from .mw_graph import MWGraph, fixed_point, global_ratio


@dataclass(frozen=True, eq=False)
class CylinderBox:
    path: tuple
    covering: TaggedBoxSet
    image_lo: np.ndarray
    image_hi: np.ndarray
    diameter_bound: float

    @property
    def box(self) -> Box:
        return Box.from_arrays(self.image_lo.min(axis=0), self.image_hi.max(axis=0))

    def distance_to(self, x) -> float:
        x = np.asarray(x, dtype=float)[None]
        return float(box_gap(x, x, self.image_lo, self.image_hi).min())


def _diameter(cover: TaggedBoxSet) -> float:
    return cover.bounding_box().diameter


def cylinder(mw: MWGraph, K: InvariantList, path: Sequence[int]) -> CylinderBox:
    """phi_alpha(K_r(alpha)) as exact per-cell image boxes plus a grid covering."""
    g = mw.graph
    if not g.is_path(tuple(path)):
        raise InvalidPath(f"{tuple(path)} is not a path")
    path = tuple(path)
    phi = mw.compose(path)
    src = K[g.r(path[-1])]
    lo, hi = phi.image_box(src.lo, src.hi)
    origin, shape = mw.grid(g.s(path[0]), K.h)
    cover = TaggedBoxSet(g.s(path[0]), origin, K.h, shape, cells_meeting(origin, K.h, shape, lo, hi))
    return CylinderBox(path, cover, lo, hi, mw.path_ratio(path) * _diameter(src))


def required_depth(mw: MWGraph, eps: float) -> int:
    c = global_ratio(mw)[1]
    return max(1, math.ceil(math.log(eps / mw.diameter) / math.log(c)))


def coding_map(mw: MWGraph, K: InvariantList, prefix: Sequence[int], eps: float) -> np.ndarray:
    """Approximate pi of an infinite path from its truncation ``prefix``.

    Returns phi_prefix applied to the centre of the bounding box of
    K_r(prefix); the true point lies in the image of that box, so the error
    is at most the product of edge ratios times half the box diagonal.
    """
    prefix = mw.graph.check_path(prefix)
    if mw.path_ratio(prefix) * mw.diameter > eps:
        raise PrefixTooShort(required_depth(mw, eps))
    centre = K[mw.graph.r(prefix[-1])].bounding_box().center
    return mw.compose(prefix)(centre)


def intertwine_residual(mw: MWGraph, K: InvariantList, e: int, prefix: Sequence[int],
                        eps: float) -> float:
    """|pi(e alpha) - phi_e(pi(alpha))| evaluated through cylinders."""
    g = mw.graph
    prefix = tuple(prefix)
    if not prefix or g.r(e) != g.s(prefix[0]):
        raise ChainMismatch(f"edge {e} does not chain into {prefix}")
    left = coding_map(mw, K, (e,) + prefix, eps)
    right = mw.maps[e](coding_map(mw, K, prefix, eps))
    return float(np.linalg.norm(left - right))


def address_of(mw: MWGraph, K: InvariantList, x, vertex: str, depth: int,
               slack: float) -> list:
    """Every alpha in E^depth(vertex) whose slack-dilated cylinder contains x.

    Prefixes are extended one edge at a time and pruned as soon as the
    cylinder misses x, so only ambiguous branches are followed.
    """
    g = mw.graph
    x = np.asarray(x, dtype=float)
    if K[vertex].distance_to(x)[0] > slack:
        raise PointNotOnAttractor(f"{x} is not within {slack} of K_{vertex}")
    frontier = [()]
    for _ in range(depth):
        nxt = []
        for alpha in frontier:
            here = g.r(alpha[-1]) if alpha else vertex
            for e in g.out_edges[here]:
                beta = alpha + (e,)
                if cylinder(mw, K, beta).distance_to(x) <= slack:
                    nxt.append(beta)
        if not nxt:
            raise PointNotOnAttractor(f"{x} has no address beyond depth {len(frontier[0])}")
        frontier = nxt
    return frontier


# eventually periodic points ------------------------------------------------


def periodic_tail(g, vertex: str) -> tuple:
    """(prefix, cycle) from following the lowest-numbered out-edge until a repeat."""
    seen = {}
    walk = []
    v = vertex
    while v not in seen:
        seen[v] = len(walk)
        e = g.out_edges[v][0]
        walk.append(e)
        v = g.r(e)
    k = seen[v]
    return tuple(walk[:k]), tuple(walk[k:])


def tail_point(mw: MWGraph, vertex: str) -> np.ndarray:
    """A point of K_vertex with known eventually periodic address."""
    prefix, cyc = periodic_tail(mw.graph, vertex)
    p = fixed_point(mw, cyc)
    return mw.compose(prefix)(p) if prefix else p


def anchor_points(mw: MWGraph, vertex: str, depth: int) -> tuple:
    """(paths, points): pi(alpha + tail) for every alpha in E^depth(vertex).

    The points lie exactly on K_vertex (up to round-off) and their addresses
    depend only on the graph, so two systems on the same graph produce
    matching anchors.
    """
    g = mw.graph
    paths = paths_from(g, vertex, depth)
    tails = {u: tail_point(mw, u) for u in g.vertices}
    pts = np.stack([mw.compose(a)(tails[g.r(a[-1])]) for a in paths])
    return paths, pts


def eventually_periodic_points(mw: MWGraph, vertex: str, prefix_len: int,
                               cycle_len: int) -> tuple:
    """Points phi_p(fixed point of q) with |p| <= prefix_len, |q| <= cycle_len.

    Returns (labels, points); each label is the pair (p, q).
    """
    g = mw.graph
    cycles = {}
    for k in range(1, cycle_len + 1):
        for u in g.vertices:
            for q in paths_from(g, u, k):
                if g.r(q[-1]) == u:
                    cycles.setdefault(u, []).append((q, fixed_point(mw, q)))
    labels, pts = [], []
    prefixes = [()]
    for k in range(1, prefix_len + 1):
        prefixes += paths_from(g, vertex, k)
    for p in prefixes:
        end = g.r(p[-1]) if p else vertex
        phi = mw.compose(p) if p else None
        for q, fp in cycles.get(end, []):
            labels.append((p, q))
            pts.append(phi(fp) if phi is not None else fp)
    if not pts:
        return [], np.empty((0, mw.dim))
    return labels, np.stack(pts)


def all_prefixes(g, vertex: str, depth: int):
    """E^1(v) u ... u E^depth(v)."""
    out = []
    for k in range(1, depth + 1):
        out.extend(paths_from(g, vertex, k))
    return out

