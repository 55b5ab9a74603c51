"""Point maps between invariant sets.

A point map sends points of K1_v to points of K2_{vertex_map[v]}.  Two
kinds exist: affine maps, and address maps f = pi2 o pi1^{-1} for totally
disconnected sources, where the address is read off by repeatedly pulling
the point back through the unique first-level cylinder that contains it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..attractor import InvariantList
from ..mw_graph import AffineMap, MWGraph
from ..symbolic import cylinder, required_depth, tail_point


def identity_vertex_map(mw: MWGraph) -> dict:
    return {v: v for v in mw.graph.vertices}


@dataclass(eq=False)
class AffinePointMap:
    """The same affine map on every vertex."""

    phi: AffineMap
    vertex_map: dict

    kind = "affine"

    def __call__(self, points, vertex: str) -> np.ndarray:
        return self.phi(np.atleast_2d(points))

    def target(self, vertex: str) -> str:
        return self.vertex_map[vertex]

    def inverse(self) -> "AffinePointMap":
        back = {w: v for v, w in self.vertex_map.items()}
        return AffinePointMap(self.phi.inverse(), back)


def first_level_addresses(mw: MWGraph, K: InvariantList, points, vertex: str,
                          depth: int) -> np.ndarray:
    """(N, depth) edge indices of the points, assuming sibling images are disjoint.

    At each step the edge whose first-level cylinder covering is nearest is
    chosen and the point is pulled back through it.  Pulling back expands
    round-off by 1/c per step, which is harmless while it stays below the
    sibling gap.
    """
    g = mw.graph
    x = np.atleast_2d(np.asarray(points, dtype=float)).copy()
    n = len(x)
    covers = {e: cylinder(mw, K, (e,)).covering for e in range(g.n_edges)}
    inverses = [m.inverse() for m in mw.maps]
    here = np.array([vertex] * n, dtype=object)
    out = np.empty((n, depth), dtype=np.int64)
    for i in range(depth):
        # snapshot so points moved to another vertex are not pulled back twice
        now = here.copy()
        for v in g.vertices:
            rows = np.flatnonzero(now == v)
            if rows.size == 0:
                continue
            edges = g.out_edges[v]
            dist = np.stack([covers[e].distance_to(x[rows]) for e in edges])
            pick = np.asarray(edges)[dist.argmin(axis=0)]
            out[rows, i] = pick
            for e in np.unique(pick):
                sel = rows[pick == e]
                x[sel] = inverses[e](x[sel])
                here[sel] = g.r(e)
    return out


def evaluate_addresses(mw: MWGraph, addresses: np.ndarray) -> np.ndarray:
    """phi_alpha(tail point of r(alpha)) for each row alpha."""
    g = mw.graph
    mats = np.stack([m.matrix for m in mw.maps])
    offs = np.stack([m.offset for m in mw.maps])
    tails = {v: tail_point(mw, v) for v in g.vertices}
    x = np.stack([tails[g.r(e)] for e in addresses[:, -1]])
    for i in range(addresses.shape[1] - 1, -1, -1):
        e = addresses[:, i]
        x = np.einsum("nij,nj->ni", mats[e], x) + offs[e]
    return x


@dataclass(eq=False)
class AddressMap:
    """f = pi_to o pi_from^{-1}, computed to ``depth`` address symbols."""

    source: MWGraph
    source_K: InvariantList
    dest: MWGraph
    dest_K: InvariantList
    depth: int
    vertex_map: dict
    eps: float = 1e-9

    kind = "address"

    @classmethod
    def build(cls, mw1: MWGraph, K1: InvariantList, mw2: MWGraph, K2: InvariantList,
              eps: float = 1e-9, depth: Optional[int] = None) -> "AddressMap":
        depth = required_depth(mw2, eps) if depth is None else depth
        return cls(mw1, K1, mw2, K2, depth, identity_vertex_map(mw1), eps)

    def __call__(self, points, vertex: str) -> np.ndarray:
        addr = first_level_addresses(self.source, self.source_K, points, vertex, self.depth)
        return evaluate_addresses(self.dest, addr)

    def target(self, vertex: str) -> str:
        return self.vertex_map[vertex]

    def inverse(self) -> "AddressMap":
        back = {w: v for v, w in self.vertex_map.items()}
        return AddressMap(self.dest, self.dest_K, self.source, self.source_K,
                          required_depth(self.source, self.eps), back, self.eps)
