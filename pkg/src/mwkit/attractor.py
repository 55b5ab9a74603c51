"""Invariant lists by box iteration of the graph-directed Hutchinson operator.

Iteration starts from the ambient boxes, so every iterate is an outer
approximation and the sequence of coverings decreases until it is stationary.
The chaos game is only a sampler used for rendering and cross-checks.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MaxIterationsExceeded, TagMismatch
from .geometry import TaggedBoxSet, TaggedPointCloud, hausdorff_distance
from .mw_graph import MWGraph, global_ratio, image_covering

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class InvariantList:
    covers: dict
    h: float
    iterations: int
    residual: float
    error_bound: float
    stationary: bool
    changes: tuple = field(default=())

    def __getitem__(self, vertex) -> TaggedBoxSet:
        return self.covers[vertex]

    @property
    def vertices(self):
        return tuple(self.covers)

    @property
    def cell_diameter(self) -> float:
        return next(iter(self.covers.values())).cell_diameter

    def total_cells(self) -> int:
        return sum(len(c) for c in self.covers.values())


def hutchinson_step(mw: MWGraph, covers: dict) -> dict:
    """One application of S_v -> union over s(e)=v of phi_e(S_r(e))."""
    g = mw.graph
    if set(covers) != set(g.vertices):
        raise TagMismatch("coverings must be given for exactly the graph's vertices")
    if len({c.h for c in covers.values()}) != 1:
        raise ValueError("all coverings must share one resolution")
    out = {}
    for v in g.vertices:
        parts = [image_covering(mw, mw.maps[e], covers[g.r(e)], v).flat for e in g.out_edges[v]]
        out[v] = covers[v].like(np.concatenate(parts))
    return out


def _same(a: dict, b: dict) -> bool:
    return all(a[v] == b[v] for v in a)


def _change(a: dict, b: dict) -> float:
    return max(hausdorff_distance(a[v], b[v]) for v in a)


def _bound(mw: MWGraph, h: float, n: int, stationary: bool) -> float:
    c = global_ratio(mw)[1]
    d = mw.dim
    rounding = h * (math.sqrt(d) + c * d) / (1 - c)
    return rounding + (0.0 if stationary else c ** n * mw.diameter)


def solve_invariant_list(mw: MWGraph, h: float, max_iterations: int = 200) -> InvariantList:
    """Iterate from the ambient boxes until the covering stops changing.

    Iteration also stops once the per-vertex Hausdorff change is at most
    ``h`` and ``c**n * D <= h``, since finer changes cannot be resolved.
    ``error_bound`` bounds the Hausdorff distance from the covering to the
    true invariant list.
    """
    if h <= 0:
        raise ValueError("resolution must be positive")
    c = global_ratio(mw)[1]
    covers = {v: mw.full(v, h) for v in mw.graph.vertices}
    changes = []
    for n in range(1, max_iterations + 1):
        nxt = hutchinson_step(mw, covers)
        stationary = _same(nxt, covers)
        change = 0.0 if stationary else _change(nxt, covers)
        changes.append(change)
        log.debug("iteration %d: change %.3e, cells %d", n, change,
                  sum(len(x) for x in nxt.values()))
        covers = nxt
        if stationary or (change <= h and c ** n * mw.diameter <= h):
            again = hutchinson_step(mw, covers)
            residual = 0.0 if _same(again, covers) else _change(again, covers)
            return InvariantList(covers, h, n, residual, _bound(mw, h, n, stationary),
                                 stationary, tuple(changes))
    best = InvariantList(covers, h, max_iterations, changes[-1],
                         _bound(mw, h, max_iterations, False), False, tuple(changes))
    raise MaxIterationsExceeded(f"no convergence within {max_iterations} iterations", best)


def chaos_game(mw: MWGraph, points_per_vertex: int, burn_in: int, seed: int) -> dict:
    """Sample each K_v through random forward paths of length ``burn_in``.

    For vertex v a path e1 e2 ... e_n starting at v is drawn edge by edge,
    uniformly among the out-edges of the current vertex, and the point
    phi_e1 o ... o phi_en(centre of the ambient box of r(e_n)) is emitted.
    Each emitted point lies within c**burn_in * D of K_v.
    """
    if points_per_vertex < 1 or burn_in < 1:
        raise ValueError("counts must be positive")
    g = mw.graph
    rng = np.random.default_rng(seed)
    mats = np.stack([m.matrix for m in mw.maps])
    offs = np.stack([m.offset for m in mw.maps])
    vindex = {v: i for i, v in enumerate(g.vertices)}
    outs = [np.asarray(g.out_edges[v]) for v in g.vertices]
    r_of = np.array([vindex[g.r(e)] for e in range(g.n_edges)])
    centers = np.stack([mw.ambient[v].center for v in g.vertices])
    result = {}
    for v in g.vertices:
        cur = np.full(points_per_vertex, vindex[v])
        path = np.empty((points_per_vertex, burn_in), dtype=np.int64)
        for i in range(burn_in):
            draw = rng.random(points_per_vertex)
            step = np.empty(points_per_vertex, dtype=np.int64)
            for u, choices in enumerate(outs):
                here = cur == u
                step[here] = choices[(draw[here] * len(choices)).astype(np.int64)]
            path[:, i] = step
            cur = r_of[step]
        x = centers[cur]
        for i in range(burn_in - 1, -1, -1):
            e = path[:, i]
            x = np.einsum("nij,nj->ni", mats[e], x) + offs[e]
        result[v] = TaggedPointCloud(v, x)
    return result
