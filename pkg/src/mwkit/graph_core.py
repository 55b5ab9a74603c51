"""Finite directed multigraphs and the path combinatorics behind E^k and E^inf.

Edges are addressed by their position ``0..n-1`` in ``DirectedGraph.edges`` so
that permutations of edges act on plain integers.  A path is a tuple of edge
indices; infinite paths only ever appear as finite truncations.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import DifferentStartVertex, InvalidPath, ValidationError

Path = tuple


@dataclass(frozen=True)
class Edge:
    name: str
    source: str
    range: str


@dataclass(frozen=True)
class DirectedGraph:
    vertices: tuple
    edges: tuple

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def s(self, e: int) -> str:
        return self.edges[e].source

    def r(self, e: int) -> str:
        return self.edges[e].range

    @cached_property
    def _edge_lookup(self):
        return {edge.name: i for i, edge in enumerate(self.edges)}

    def edge_index(self, name) -> int:
        try:
            return self._edge_lookup[str(name)]
        except KeyError:
            raise KeyError(f"unknown edge {name!r}") from None

    def edge_names(self, path: Iterable[int]) -> list:
        return [self.edges[e].name for e in path]

    def parse_path(self, names: Iterable) -> Path:
        return tuple(self.edge_index(n) for n in names)

    @cached_property
    def out_edges(self) -> dict:
        """Edges leaving each vertex, ascending by index."""
        out = {v: [] for v in self.vertices}
        for i, edge in enumerate(self.edges):
            out[edge.source].append(i)
        return {v: tuple(es) for v, es in out.items()}

    @cached_property
    def in_edges(self) -> dict:
        inc = {v: [] for v in self.vertices}
        for i, edge in enumerate(self.edges):
            inc[edge.range].append(i)
        return {v: tuple(es) for v, es in inc.items()}

    def is_path(self, path: Sequence[int]) -> bool:
        if len(path) == 0:
            return False
        if any(not (0 <= e < self.n_edges) for e in path):
            return False
        return all(self.r(a) == self.s(b) for a, b in zip(path, path[1:]))

    def check_path(self, path: Sequence[int]) -> Path:
        path = tuple(int(e) for e in path)
        if not self.is_path(path):
            raise InvalidPath(f"{path} is not a chained path")
        return path

    def path_source(self, path: Sequence[int]) -> str:
        return self.s(path[0])

    def path_range(self, path: Sequence[int]) -> str:
        return self.r(path[-1])


def validate_graph(vertices: Sequence, edges: Sequence) -> DirectedGraph:
    """Build a graph from raw ids, rejecting any structural defect.

    ``edges`` is a sequence of ``(name, source, range)`` triples.  Every
    problem is collected before raising, so the error lists all of them.
    """
    vertices = tuple(str(v) for v in vertices)
    issues = []
    seen = set()
    for v in vertices:
        if v in seen:
            issues.append(("DuplicateVertex", v))
        seen.add(v)
    built = []
    names = set()
    for name, src, rng in edges:
        name, src, rng = str(name), str(src), str(rng)
        if name in names:
            issues.append(("DuplicateEdge", name))
        names.add(name)
        if src not in seen or rng not in seen:
            issues.append(("DanglingEdgeEndpoint", name))
            continue
        built.append(Edge(name, src, rng))
    sources = {e.source for e in built}
    ranges = {e.range for e in built}
    for v in vertices:
        if v not in sources:
            issues.append(("SinkVertex", v))
        if v not in ranges:
            issues.append(("SourceVertex", v))
    if issues:
        raise ValidationError(issues)
    return DirectedGraph(vertices, tuple(built))


def paths_of_length(g: DirectedGraph, k: int) -> list:
    """All chained k-tuples of edges, in lexicographic order of edge index."""
    if k < 1:
        raise ValueError("k must be >= 1")
    paths = [(e,) for e in range(g.n_edges)]
    for _ in range(k - 1):
        paths = [p + (e,) for p in paths for e in g.out_edges[g.r(p[-1])]]
    return paths


def paths_from(g: DirectedGraph, v: str, k: int) -> list:
    """Paths of length k starting at vertex v (the set E^k(v))."""
    paths = [(e,) for e in g.out_edges[v]]
    for _ in range(k - 1):
        paths = [p + (e,) for p in paths for e in g.out_edges[g.r(p[-1])]]
    return paths


def common_prefix_length(a: Sequence, b: Sequence) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def path_metric(g: DirectedGraph, a: Sequence[int], b: Sequence[int], c: float) -> float:
    """Ultrametric c**|a ^ b| on truncated infinite paths (0 when equal).

    Callers pass the global ratio max_e c_hi(e); with unequal edge ratios
    this is one admissible choice, not a canonical one.
    """
    if not 0 < c < 1:
        raise ValueError("c must lie in (0, 1)")
    if len(a) == 0 or len(b) == 0 or g.s(a[0]) != g.s(b[0]):
        raise DifferentStartVertex("paths must share a start vertex")
    if tuple(a) == tuple(b):
        return 0.0
    return float(c ** common_prefix_length(a, b))


def cycles_up_to(g: DirectedGraph, n0: int) -> list:
    """Every path of length <= n0 whose range equals its source."""
    if n0 < 1:
        raise ValueError("n0 must be >= 1")
    out = []
    for k in range(1, n0 + 1):
        out.extend(p for p in paths_of_length(g, k) if g.s(p[0]) == g.r(p[-1]))
    return out
