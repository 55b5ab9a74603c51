"""Structural classification and aperiodicity witnesses.

``classify_disconnected`` never claims disjointness from inconclusive
numerics: Disjoint needs a positive gap between outer coverings, Overlapping
needs two eventually periodic points of K whose images under sibling edges
coincide, and anything else after the refinement budget is Unknown.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.spatial import cKDTree

from .attractor import InvariantList, solve_invariant_list
from .errors import NoQualifyingCenter, ResolutionTooCoarse
from .geometry import box_gap, min_separation
from .graph_core import cycles_up_to, paths_of_length
from .mw_graph import MWGraph, fixed_point
from .symbolic import cylinder, eventually_periodic_points

log = logging.getLogger(__name__)


class Verdict(str, Enum):
    DISJOINT = "Disjoint"
    OVERLAPPING = "Overlapping"
    UNKNOWN = "Unknown"


@dataclass
class DisconnectednessReport:
    verdict: Verdict
    gaps: dict
    witnesses: dict
    resolution: float
    refinements: int
    witness_pair: Optional[tuple] = None

    @property
    def witness(self):
        return None if self.witness_pair is None else self.witnesses[self.witness_pair]

    def witness_for(self, e: int, f: int):
        return self.witnesses.get((min(e, f), max(e, f)))


def sibling_pairs(g):
    for v in g.vertices:
        outs = g.out_edges[v]
        for i, e in enumerate(outs):
            for f in outs[i + 1:]:
                yield e, f


def _coincidences(mw: MWGraph, e: int, f: int, prefix_len: int, cycle_len: int, tol: float):
    """Points phi_e(p) == phi_f(q) with p, q eventually periodic points of K."""
    g = mw.graph
    _, pe = eventually_periodic_points(mw, g.r(e), prefix_len, cycle_len)
    _, pf = eventually_periodic_points(mw, g.r(f), prefix_len, cycle_len)
    if len(pe) == 0 or len(pf) == 0:
        return None
    ie, jf = mw.maps[e](pe), mw.maps[f](pf)
    hits = cKDTree(ie).query_ball_tree(cKDTree(jf), tol)
    for i, js in enumerate(hits):
        if js:
            return (ie[i] + jf[min(js)]) / 2
    return None


def classify_disconnected(mw: MWGraph, K: InvariantList, max_refinements: int = 2,
                          prefix_len: int = 3, cycle_len: int = 2) -> DisconnectednessReport:
    """Decide whether sibling edge images are pairwise disjoint.

    Gaps are measured between outer grid coverings of phi_e(K_r(e)), so a
    positive gap proves disjointness.  Touching pairs are searched for an
    exact common point; without one the invariant list is recomputed at
    half the resolution, up to ``max_refinements`` times.
    """
    g = mw.graph
    tol = 1e-9 * max(1.0, mw.diameter)
    current = K
    for level in range(max_refinements + 1):
        images = {e: cylinder(mw, current, (e,)).covering for e in range(g.n_edges)}
        gaps = {(e, f): min_separation(images[e], images[f]) for e, f in sibling_pairs(g)}
        touching = [p for p, gap in gaps.items() if gap <= 0]
        if not touching:
            return DisconnectednessReport(Verdict.DISJOINT, gaps, {}, current.h, level)
        witnesses = {}
        for e, f in touching:
            w = _coincidences(mw, e, f, prefix_len, cycle_len, tol)
            if w is not None:
                witnesses[(e, f)] = w
        if witnesses:
            first = min(witnesses)
            return DisconnectednessReport(Verdict.OVERLAPPING, gaps, witnesses, current.h,
                                          level, first)
        log.debug("level %d: %d touching pairs without witness", level, len(touching))
        if level < max_refinements:
            current = solve_invariant_list(mw, current.h / 2)
    return DisconnectednessReport(Verdict.UNKNOWN, gaps, {}, current.h, max_refinements)


# fixed-point avoidance -----------------------------------------------------


@dataclass(frozen=True)
class UnfixedPoint:
    vertex: str
    point: np.ndarray
    clearance: float


def cycle_fixed_points(mw: MWGraph, n0: int) -> dict:
    """vertex -> (k, d) array of fixed points of cycles of length <= n0 at it."""
    out = {v: [] for v in mw.graph.vertices}
    for cyc in cycles_up_to(mw.graph, n0):
        out[mw.graph.s(cyc[0])].append(fixed_point(mw, cyc))
    return {v: np.array(p).reshape(-1, mw.dim) for v, p in out.items()}


def _clearance(points: np.ndarray, fixed: np.ndarray) -> np.ndarray:
    if len(fixed) == 0:
        return np.full(len(points), np.inf)
    return cKDTree(fixed).query(points)[0]


def find_unfixed_point(mw: MWGraph, K: InvariantList, n0: int, margin: float,
                       candidates: Optional[dict] = None) -> UnfixedPoint:
    """The sample farthest from every fixed point of a cycle of length <= n0.

    ``candidates`` maps vertex -> (m, d) points; the default is the cell
    centres of each K_v.  The earliest sample wins ties.
    """
    if n0 < 1:
        raise ValueError("n0 must be >= 1")
    fixed = cycle_fixed_points(mw, n0)
    best = None
    for v in mw.graph.vertices:
        pts = K[v].centers if candidates is None else np.asarray(candidates.get(v, []))
        if len(pts) == 0:
            continue
        clear = _clearance(pts, fixed[v])
        i = int(np.argmax(clear))
        if best is None or clear[i] > best.clearance:
            best = UnfixedPoint(v, pts[i].copy(), float(clear[i]))
    if best is None or best.clearance < margin:
        got = None if best is None else best.clearance
        raise ResolutionTooCoarse(f"no sample clears margin {margin} (best {got})")
    return best


# aperiodicity witness ---------------------------------------------------------


@dataclass(frozen=True)
class Bump:
    """Radial hat on K_vertex: 1 at the centre, 0 outside the radius."""

    vertex: str
    center: np.ndarray
    radius: float

    def __call__(self, points, vertex: str) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if vertex != self.vertex:
            return np.zeros(len(pts))
        dist = np.linalg.norm(pts - self.center, axis=1)
        return np.maximum(0.0, 1.0 - dist / self.radius)


@dataclass
class WitnessReport:
    vertex: str
    t0: np.ndarray
    clearance: float
    delta1: float
    delta2: float
    delta: float
    sup_xax: float
    max_twisted: float
    nonzero_twisted: int
    checked: int
    min_ball_separation: float
    eps: float
    n0: int
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (self.sup_xax >= 1 - self.eps and self.max_twisted == 0.0
                and self.min_ball_separation >= 2 * self.delta1 * (1 - 1e-12))


def _a0_values(K: InvariantList, a0) -> dict:
    if callable(a0):
        return {v: np.asarray(a0(K[v].centers, v), dtype=float).reshape(-1) for v in K.vertices}
    if np.isscalar(a0):
        return {v: np.full(len(K[v]), float(a0)) for v in K.vertices}
    return {v: np.asarray(a0[v], dtype=float).reshape(-1) for v in K.vertices}


def aperiodicity_witness(mw: MWGraph, K: InvariantList, a0, n0: int, eps: float,
                         margin: Optional[float] = None, zero_slack: float = 1e-12):
    """Build the bump x of the aperiodicity argument and check it on samples.

    ``a0`` is a non-negative function on the cell-centre samples of K: a
    scalar, a callable ``(points, vertex) -> values`` or a dict of per-vertex
    arrays.  Returns ``(bump, report)``; the report certifies
    sup x*a0*x >= 1 - eps (after normalising a0) and that
    x(phi_alpha(t)) * x(t) vanishes for every path of length <= n0.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    g = mw.graph
    vals = _a0_values(K, a0)
    if any((v < -zero_slack).any() for v in vals.values()):
        raise ValueError("a0 must be non-negative")
    norm = max(float(v.max()) for v in vals.values())
    if norm <= zero_slack:
        raise NoQualifyingCenter("a0 vanishes on every sample")
    vals = {v: x / norm for v, x in vals.items()}
    margin = K.cell_diameter if margin is None else margin

    cands = {v: K[v].centers[vals[v] >= 1 - eps] for v in g.vertices}
    try:
        pick = find_unfixed_point(mw, K, n0, margin, cands)
    except ResolutionTooCoarse as err:
        raise NoQualifyingCenter(str(err)) from None
    v0, t0 = pick.vertex, pick.point

    cycles = [c for c in cycles_up_to(g, n0) if g.s(c[0]) == v0]
    if cycles:
        moves = [float(np.linalg.norm(mw.compose(c)(t0) - t0)) for c in cycles]
        delta1 = min(moves) / 2
    else:
        moves = []
        delta1 = mw.diameter
    zero = vals[v0] <= zero_slack
    if zero.any():
        cover = K[v0]
        delta2 = float(box_gap(t0[None], t0[None], cover.lo[zero], cover.hi[zero]).min())
    else:
        delta2 = delta1
    delta = min(delta1, delta2)
    if delta <= 0:
        raise NoQualifyingCenter("centre touches the zero set of a0")
    bump = Bump(v0, t0, delta)

    sup_xax = max(float((bump(K[v].centers, v) ** 2 * vals[v]).max()) for v in g.vertices)
    worst, nonzero, checked = 0.0, 0, 0
    for k in range(1, n0 + 1):
        for alpha in paths_of_length(g, k):
            src, rng = g.s(alpha[0]), g.r(alpha[-1])
            t = K[rng].centers
            prod = bump(mw.compose(alpha)(t), src) * bump(t, rng)
            checked += len(t)
            nonzero += int(np.count_nonzero(prod))
            worst = max(worst, float(np.abs(prod).max()))
    report = WitnessReport(
        vertex=v0, t0=t0, clearance=pick.clearance, delta1=delta1, delta2=delta2,
        delta=delta, sup_xax=sup_xax, max_twisted=worst, nonzero_twisted=nonzero,
        checked=checked, min_ball_separation=min(moves) if moves else float("inf"),
        eps=eps, n0=n0,
    )
    return bump, report
