"""Conjugacy certificates and the isomorphisms they induce.

Stored orientation: on the cover set U_j,

    f^{-1} o phi2_{sigma_j(e)} o f = phi1_e.

``sigmas[j][e]`` is sigma_j(e), with edges as integer indices shared by the
two graphs.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from ..errors import (CertificateInvalid, InconsistentOverlap, NoConsistentMatching,
                      NotTotallyDisconnected, SingularAtSample)
from ..geometry import SNAP
from ..mw_graph import MWGraph
from .elements import AlgebraElement, CorrElement, SampleGrid
from .ops import inner_product, left_action, right_action

log = logging.getLogger(__name__)

# brute-force permutation search up to this many edges per fibre
BRUTE_FORCE_MAX = 7


@dataclass(eq=False)
class CoverSet:
    """A union of grid cells of K1; ``cells=None`` means all of K1."""

    cells: Optional[dict] = None

    @property
    def is_all(self) -> bool:
        return self.cells is None

    def contains(self, vertex: str, points) -> np.ndarray:
        pts = np.atleast_2d(points)
        if self.cells is None:
            return np.ones(len(pts), dtype=bool)
        cover = self.cells.get(vertex)
        if cover is None:
            return np.zeros(len(pts), dtype=bool)
        return cover.distance_to(pts) <= SNAP * cover.h

    def overlaps(self, other: "CoverSet") -> bool:
        if self.is_all or other.is_all:
            return True
        return any(v in other.cells and self.cells[v].intersection(other.cells[v]) is not None
                   for v in self.cells)

    def union(self, other: "CoverSet") -> "CoverSet":
        if self.is_all or other.is_all:
            return CoverSet(None)
        cells = dict(self.cells)
        for v, c in other.cells.items():
            cells[v] = cells[v].union(c) if v in cells else c
        return CoverSet(cells)


def check_permutation(sigma: Sequence[int], n: int) -> tuple:
    sigma = tuple(int(x) for x in sigma)
    if sorted(sigma) != list(range(n)):
        raise CertificateInvalid(f"{sigma} is not a permutation of {n} edges")
    return sigma


def invert_permutation(sigma: Sequence[int]) -> tuple:
    out = [0] * len(sigma)
    for i, s in enumerate(sigma):
        out[s] = i
    return tuple(out)


@dataclass(eq=False)
class ConjugacyCertificate:
    f: object
    cover: list
    sigmas: list

    def __post_init__(self):
        if len(self.cover) != len(self.sigmas):
            raise CertificateInvalid("one permutation is needed per cover set")
        if not self.cover:
            raise CertificateInvalid("empty cover")
        n = len(self.sigmas[0])
        self.sigmas = [check_permutation(s, n) for s in self.sigmas]

    @property
    def m(self) -> int:
        return len(self.cover)

    @property
    def n_edges(self) -> int:
        return len(self.sigmas[0])

    def membership(self, grid: SampleGrid) -> dict:
        """vertex -> index of the first cover set holding each sample, -1 if none."""
        out = {}
        for v in grid.vertices:
            first = np.full(grid.counts[v], -1, dtype=np.int64)
            for j, u in enumerate(self.cover):
                hit = (first < 0) & u.contains(v, grid.points[v])
                first[hit] = j
            out[v] = first
        return out


# V and beta ----------------------------------------------------------------


@dataclass(eq=False)
class Isomorphism:
    """V: X2 -> X1 and beta(b) = b o f, sampled on (grid1, grid2)."""

    cert: ConjugacyCertificate
    grid1: SampleGrid
    grid2: SampleGrid
    first: dict
    f_index: dict
    slack: float

    def V(self, xi: CorrElement) -> CorrElement:
        if xi.grid is not self.grid2 or xi.order != 1:
            raise CertificateInvalid("V acts on order-1 elements of the second grid")
        g = self.grid1.mw.graph
        out = CorrElement.zeros(self.grid1, 1)
        paths, slices, _ = self.grid1.layout(1)
        for (e,) in paths:
            u = g.r(e)
            first = self.first[u]
            vals = np.empty(len(first), dtype=complex)
            for j, sigma in enumerate(self.cert.sigmas):
                rows = first == j
                vals[rows] = xi.block((sigma[e],))[self.f_index[u][rows]]
            out.values[slices[(e,)]] = vals
        return out

    def beta(self, b: AlgebraElement) -> AlgebraElement:
        if b.grid is not self.grid2:
            raise CertificateInvalid("beta acts on elements of the second grid")
        f = self.cert.f
        vals = np.concatenate([b.on(f.target(u))[self.f_index[u]] for u in self.grid1.vertices])
        return AlgebraElement(self.grid1, vals)


def build_V(cert: ConjugacyCertificate, mw1: MWGraph, mw2: MWGraph,
            grids: tuple) -> Isomorphism:
    """V(xi)(e, x) = xi(sigma_j(e), f(x)) for the first U_j holding x.

    The cover is turned into a partition by taking the first set that holds
    each sample.  f(x) is evaluated exactly and then snapped to the nearest
    sample of the second grid.
    """
    grid1, grid2 = grids
    g1, g2 = mw1.graph, mw2.graph
    if cert.n_edges != g1.n_edges or g1.n_edges != g2.n_edges:
        raise CertificateInvalid("permutations do not match the edge count")
    first = cert.membership(grid1)
    gaps = sum(int((f < 0).sum()) for f in first.values())
    if gaps:
        raise CertificateInvalid(f"CoverGap: {gaps} samples lie in no cover set")
    f_index, slack = {}, 0.0
    for u in grid1.vertices:
        w = cert.f.target(u)
        for j, sigma in enumerate(cert.sigmas):
            for e in g1.in_edges[u]:
                if (first[u] == j).any() and g2.r(sigma[e]) != w:
                    raise CertificateInvalid(f"sigma_{j} sends edge {e} to the wrong fibre")
        idx, dist = grid2.nearest(w, cert.f(grid1.points[u], u))
        if dist.max() > grid2.resolution:
            raise CertificateInvalid(f"f moves samples of {u} {dist.max():.3g} away from K2")
        if len(np.unique(idx)) != grid2.counts[w] or grid1.counts[u] != grid2.counts[w]:
            raise CertificateInvalid(f"f is not bijective on the samples of {u}")
        f_index[u] = idx
        slack = max(slack, float(dist.max()))
    return Isomorphism(cert, grid1, grid2, first, f_index, slack)


@dataclass
class VerificationReport:
    inner_product_residual: float
    bimodule_residual: float
    basis_residual: float
    trials: int
    tol: float
    interpolation_slack: float

    @property
    def passed(self) -> bool:
        return max(self.inner_product_residual, self.bimodule_residual,
                   self.basis_residual) <= self.tol


def verify_isomorphism(iso: Isomorphism, trials: int = 100, tol: float = 1e-9,
                       seed: int = 0) -> VerificationReport:
    """Check <V xi, V eta> = beta(<xi, eta>) and V(b1 xi b2) = beta(b1) V(xi) beta(b2).

    Random elements have entries uniform in the unit square of C; the
    basis pairs delta_g, delta_e are checked as well.
    """
    rng = np.random.default_rng(seed)
    grid2 = iso.grid2
    V, beta = iso.V, iso.beta
    ip = bim = 0.0
    for _ in range(trials):
        xi, eta = CorrElement.random(grid2, rng), CorrElement.random(grid2, rng)
        b1, b2 = AlgebraElement.random(grid2, rng), AlgebraElement.random(grid2, rng)
        ip = max(ip, (inner_product(V(xi), V(eta)) - beta(inner_product(xi, eta))).sup())
        lhs = V(right_action(left_action(b1, xi), b2))
        rhs = right_action(left_action(beta(b1), V(xi)), beta(b2))
        bim = max(bim, (lhs - rhs).sup())
    n = grid2.mw.n_edges
    basis = [CorrElement.basis(grid2, (e,)) for e in range(n)]
    images = [V(d) for d in basis]
    bas = 0.0
    for g_, e in itertools.product(range(n), repeat=2):
        want = beta(inner_product(basis[g_], basis[e]))
        bas = max(bas, (inner_product(images[g_], images[e]) - want).sup())
    return VerificationReport(ip, bim, bas, trials, tol, iso.slack)


# w-matrix and extraction -----------------------------------------------------


@dataclass(eq=False)
class WMatrix:
    """w[x, e, g] = <delta_e, W(delta_g)>(x) at every sample x of grid."""

    grid: SampleGrid
    values: np.ndarray


def w_matrix(iso: Isomorphism) -> WMatrix:
    grid1 = iso.grid1
    g = grid1.mw.graph
    n = g.n_edges
    w = np.zeros((grid1.size, n, n), dtype=complex)
    for col in range(n):
        img = iso.V(CorrElement.basis(iso.grid2, (col,)))
        for e in range(n):
            w[grid1.offsets[g.r(e)], e, col] = img.block((e,))
    return WMatrix(grid1, w)


def isometry_residual(w: WMatrix, iso: Isomorphism) -> float:
    """sup |sum_f conj(w_fg) w_fe - beta(<delta_g, delta_e>)| over samples."""
    gram = np.einsum("xfg,xfe->xge", w.values.conj(), w.values)
    n = gram.shape[1]
    basis = [CorrElement.basis(iso.grid2, (e,)) for e in range(n)]
    want = np.zeros_like(gram)
    for g_, e in itertools.product(range(n), repeat=2):
        want[:, g_, e] = iso.beta(inner_product(basis[g_], basis[e])).values
    return float(np.abs(gram - want).max())


def best_matching(weights: np.ndarray) -> tuple:
    """Rows -> columns maximising the sum of log|w|; first maximum wins.

    Returns None when every perfect matching uses a zero entry.
    """
    k = weights.shape[0]
    with np.errstate(divide="ignore"):
        logw = np.log(np.abs(weights))
    if k <= BRUTE_FORCE_MAX:
        best, best_score = None, -np.inf
        for p in itertools.permutations(range(k)):
            score = logw[np.arange(k), p].sum()
            if score > best_score:
                best, best_score = p, score
        return best
    finite = np.where(np.isfinite(logw), logw, -1e300)
    rows, cols = linear_sum_assignment(-finite)
    if not np.isfinite(logw[rows, cols]).all():
        return None
    return tuple(int(c) for c in cols)


def _sigma_at(w: np.ndarray, rows: list, cols: list, n: int, label) -> tuple:
    block = w[np.ix_(rows, cols)]
    if len(rows) != len(cols):
        raise NoConsistentMatching(label)
    sv = np.linalg.svd(block, compute_uv=False)
    if sv.size and sv.min() <= 1e-12 * max(1.0, sv.max()):
        raise SingularAtSample(label)
    match = best_matching(block)
    if match is None:
        raise NoConsistentMatching(label)
    # sigma_x sends each column g to the row whose w entry is nonzero; the
    # stored permutation is its inverse, sending rows to columns
    sigma_x = {cols[match[i]]: rows[i] for i in range(len(rows))}
    stored = {row: col for col, row in sigma_x.items()}
    rest_rows = [e for e in range(n) if e not in stored]
    rest_cols = [g for g in range(n) if g not in sigma_x]
    stored.update(zip(rest_rows, rest_cols))
    return tuple(stored[e] for e in range(n))


def extract_conjugacy(w: WMatrix, f, mw1: MWGraph, mw2: MWGraph) -> ConjugacyCertificate:
    """Pick sigma_x per sample by matching, then merge equal sigmas into cover sets.

    At a sample of K1_u only edges ending at u carry nonzero rows, so the
    matching runs on that fibre block; the remaining edges are paired in
    increasing order.
    """
    grid = w.grid
    g1, g2 = mw1.graph, mw2.graph
    n = g1.n_edges
    groups = {}
    for u in grid.vertices:
        rows = list(g1.in_edges[u])
        cols = list(g2.in_edges[f.target(u)])
        base = grid.offsets[u].start
        for i in range(grid.counts[u]):
            label = (u, i, tuple(grid.points[u][i]))
            sigma = _sigma_at(w.values[base + i], rows, cols, n, label)
            groups.setdefault(sigma, {}).setdefault(u, []).append(i)
    cover, sigmas = [], []
    for sigma, members in groups.items():
        cells = {u: grid.cell_of(u, grid.points[u][idx]) for u, idx in members.items()}
        cover.append(CoverSet(cells))
        sigmas.append(sigma)
    return ConjugacyCertificate(f, cover, sigmas)


# permutation field -------------------------------------------------------------


@dataclass(eq=False)
class PermutationField:
    """Piecewise constant x -> sigma on merged cover components."""

    components: list

    def at(self, vertex: str, points) -> list:
        pts = np.atleast_2d(points)
        out = [None] * len(pts)
        for cover, sigma in self.components:
            for i in np.flatnonzero(cover.contains(vertex, pts)):
                if out[i] is None:
                    out[i] = sigma
        return out

    @property
    def is_constant(self) -> bool:
        return len({s for _, s in self.components}) == 1


def permutation_field(cert: ConjugacyCertificate, classification=None) -> PermutationField:
    """Merge overlapping cover sets; overlapping sets must carry equal sigma.

    Pass the source system's ``DisconnectednessReport`` to enforce that it
    was classified Disjoint.
    """
    if classification is not None and classification.verdict != "Disjoint":
        raise NotTotallyDisconnected(1, classification.verdict)
    parent = list(range(cert.m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in itertools.combinations(range(cert.m), 2):
        if cert.cover[i].overlaps(cert.cover[j]):
            if cert.sigmas[i] != cert.sigmas[j]:
                raise InconsistentOverlap(i, j)
            parent[find(j)] = find(i)
    merged = {}
    for i in range(cert.m):
        root = find(i)
        if root in merged:
            merged[root] = (merged[root][0].union(cert.cover[i]), merged[root][1])
        else:
            merged[root] = (cert.cover[i], cert.sigmas[i])
    return PermutationField([merged[r] for r in sorted(merged)])


# refutation ----------------------------------------------------------------------


@dataclass
class RefutationReport:
    residuals: dict
    per_sample: np.ndarray
    cover_gap: bool
    uncovered: int
    tol: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0

    @property
    def passed(self) -> bool:
        return not self.cover_gap and self.max_residual <= self.tol


def refute_certificate(cert: ConjugacyCertificate, mw1: MWGraph, mw2: MWGraph,
                       grid: SampleGrid, tol: float) -> RefutationReport:
    """sup over U_j samples of |f^{-1}(phi2_{sigma_j(e)}(f(x))) - phi1_e(x)| per (j, e).

    ``per_sample`` holds, for every sample in grid order, the largest
    residual over the cover sets holding it and the edges ending at its
    vertex (NaN when uncovered).
    """
    g1 = mw1.graph
    f, f_inv = cert.f, cert.f.inverse()
    residuals = {}
    per_sample = np.full(grid.size, np.nan)
    uncovered = 0
    for u in grid.vertices:
        pts = grid.points[u]
        fx = f(pts, u)
        local = np.full(len(pts), -np.inf)
        covered = np.zeros(len(pts), dtype=bool)
        for j, (cover, sigma) in enumerate(zip(cert.cover, cert.sigmas)):
            mask = cover.contains(u, pts)
            covered |= mask
            if not mask.any():
                continue
            for e in g1.in_edges[u]:
                h = sigma[e]
                back = f_inv(mw2.maps[h](fx[mask]), mw2.graph.s(h))
                res = np.linalg.norm(back - mw1.maps[e](pts[mask]), axis=1)
                residuals[(j, e)] = max(residuals.get((j, e), 0.0), float(res.max()))
                local[mask] = np.maximum(local[mask], res)
        local[~covered] = np.nan
        per_sample[grid.offsets[u]] = local
        uncovered += int((~covered).sum())
    return RefutationReport(residuals, per_sample, uncovered > 0, uncovered, tol)
