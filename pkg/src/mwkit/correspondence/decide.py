"""Deciding isomorphism of correspondences for systems on a common graph."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..attractor import InvariantList, solve_invariant_list
from ..errors import GraphMismatch
from ..mw_graph import AffineMap, MWGraph
from ..structure import Verdict, classify_disconnected
from ..symbolic import anchor_points
from .certificate import (BRUTE_FORCE_MAX, ConjugacyCertificate, CoverSet, RefutationReport,
                          VerificationReport, build_V, refute_certificate, verify_isomorphism)
from .elements import SampleGrid
from .maps import AddressMap, AffinePointMap, identity_vertex_map

log = logging.getLogger(__name__)

ISOMORPHIC = "Isomorphic"
NOT_ISOMORPHIC = "NotIsomorphic"
UNKNOWN = "Unknown"


@dataclass
class Decision:
    verdict: str
    classifications: tuple
    certificate: Optional[ConjugacyCertificate] = None
    verification: Optional[VerificationReport] = None
    refutation: Optional[RefutationReport] = None
    witness: Optional[dict] = None
    evidence: dict = field(default_factory=dict)
    note: str = ""


def check_same_graph(mw1: MWGraph, mw2: MWGraph):
    g1, g2 = mw1.graph, mw2.graph
    if g1.vertices != g2.vertices or g1.n_edges != g2.n_edges:
        raise GraphMismatch("vertex sets or edge counts differ")
    for e in range(g1.n_edges):
        if (g1.s(e), g1.r(e)) != (g2.s(e), g2.r(e)):
            raise GraphMismatch(f"edge {g1.edges[e].name} has different endpoints")


def _same_system(mw1: MWGraph, mw2: MWGraph) -> bool:
    return (mw1 is mw2) or (
        all(a == b for a, b in zip(mw1.maps, mw2.maps))
        and all(mw1.ambient[v] == mw2.ambient[v] for v in mw1.graph.vertices))


def anchor_grid(mw: MWGraph, K: InvariantList, depth: int) -> SampleGrid:
    points = {v: anchor_points(mw, v, depth)[1] for v in mw.graph.vertices}
    return SampleGrid.from_points(mw, K, points)


def identity_refutation(mw1: MWGraph, mw2: MWGraph, grid: SampleGrid) -> dict:
    """sigma -> sup residual of the single-set certificate (f = id, sigma)."""
    if mw1.dim != mw2.dim or mw1.n_edges > BRUTE_FORCE_MAX:
        return {}
    f = AffinePointMap(AffineMap.identity(mw1.dim), identity_vertex_map(mw1))
    out = {}
    for sigma in itertools.permutations(range(mw1.n_edges)):
        cert = ConjugacyCertificate(f, [CoverSet()], [sigma])
        out[sigma] = refute_certificate(cert, mw1, mw2, grid, 0.0).max_residual
    return out


def decide_iso_totally_disconnected(mw1: MWGraph, mw2: MWGraph, h1: float, h2: float,
                                    tol: float = 1e-3, anchor_depth: int = 6,
                                    trials: int = 20, seed: int = 0,
                                    max_refinements: int = 2) -> Decision:
    """Decide isomorphism for two systems on one graph, or answer Unknown.

    Both Disjoint: f = pi2 o pi1^{-1} as an address map, a single cover set
    and sigma = id, checked on anchor samples (points with known addresses).
    Exactly one Disjoint: refusal carrying the other system's overlap
    witness.  Otherwise Unknown, with the identity-map refutation table
    attached as evidence.
    """
    check_same_graph(mw1, mw2)
    K1, K2 = solve_invariant_list(mw1, h1), solve_invariant_list(mw2, h2)
    r1 = classify_disconnected(mw1, K1, max_refinements)
    r2 = classify_disconnected(mw2, K2, max_refinements)
    both = (r1, r2)
    verdicts = (r1.verdict, r2.verdict)
    log.info("classifications: %s, %s", *verdicts)

    if verdicts == (Verdict.DISJOINT, Verdict.DISJOINT):
        ident = tuple(range(mw1.n_edges))
        if _same_system(mw1, mw2):
            f = AffinePointMap(AffineMap.identity(mw1.dim), identity_vertex_map(mw1))
        else:
            f = AddressMap.build(mw1, K1, mw2, K2)
        cert = ConjugacyCertificate(f, [CoverSet()], [ident])
        grid1, grid2 = anchor_grid(mw1, K1, anchor_depth), anchor_grid(mw2, K2, anchor_depth)
        report = verify_isomorphism(build_V(cert, mw1, mw2, (grid1, grid2)), trials, tol, seed)
        refutation = refute_certificate(cert, mw1, mw2, grid1, tol)
        verdict = ISOMORPHIC if report.passed and refutation.passed else UNKNOWN
        return Decision(verdict, both, cert, report, refutation)

    if Verdict.DISJOINT in verdicts and Verdict.UNKNOWN not in verdicts:
        which = 2 if r1.verdict == Verdict.DISJOINT else 1
        rep = both[which - 1]
        witness = {"system": which, "pair": rep.witness_pair,
                   "point": np.asarray(rep.witness).tolist()}
        return Decision(NOT_ISOMORPHIC, both, witness=witness,
                        note=f"system {which} is not totally disconnected")

    grid1 = SampleGrid.from_cells(mw1, K1)
    evidence = identity_refutation(mw1, mw2, grid1)
    note = ("classifications do not settle the question; the table refutes only "
            "f = identity with a single permutation, not all homeomorphisms")
    return Decision(UNKNOWN, both, evidence=evidence, note=note)


def stable_under_refinement(decision: Decision, mw1: MWGraph, mw2: MWGraph,
                            factor: int = 2) -> bool:
    """Re-classify both systems at finer resolution; True if verdicts persist."""
    again = []
    for mw, rep in zip((mw1, mw2), decision.classifications):
        K = solve_invariant_list(mw, rep.resolution / factor)
        again.append(classify_disconnected(mw, K, 0).verdict)
    return tuple(again) == tuple(r.verdict for r in decision.classifications)

