"""Command implementations.  Each returns ``(exit_code, report_dict)``."""

from __future__ import annotations

import itertools
import logging
import time
from pathlib import Path

import numpy as np

from ..attractor import chaos_game, solve_invariant_list
from ..correspondence import (AddressMap, SampleGrid, build_V, decide_iso_totally_disconnected,
                              refute_certificate, verify_isomorphism)
from ..correspondence.decide import anchor_grid
from ..errors import CertificateInvalid, MaxIterationsExceeded, ValidationError
from ..mw_graph import fixed_point, global_ratio
from ..structure import aperiodicity_witness, classify_disconnected
from ..symbolic import coding_map, required_depth
from .config import evaluate, load_config
from .formats import (digest, format_boxes, format_certificate, format_csv, parse_certificate,
                      write_text)
from .render import encode_ppm, rasterize_cover, rasterize_points

log = logging.getLogger(__name__)

OK, FAIL, INPUT_ERROR, EXHAUSTED = 0, 1, 2, 3


def _report(command: str, texts: list, **fields) -> dict:
    return dict(command=command, inputs=digest(*texts), **fields)


def _system(path):
    cfg = load_config(path)
    return cfg, cfg.build()


def _resolution(args, cfg, mw) -> float:
    if getattr(args, "resolution", None):
        return evaluate(args.resolution)
    return cfg.number("resolution", mw.diameter / 256)


def _classification(rep) -> dict:
    return {"verdict": rep.verdict.value, "resolution": rep.resolution,
            "refinements": rep.refinements, "gaps": rep.gaps,
            "witness_pair": rep.witness_pair, "witness": rep.witness,
            "witnesses": rep.witnesses}


def cmd_validate(args):
    cfg = load_config(args.config)
    try:
        mw = cfg.build()
    except ValidationError as err:
        issues = [{"kind": k, "subject": s} for k, s in err.issues]
        return INPUT_ERROR, _report("validate", [cfg.source], valid=False, issues=issues)
    c1, c = global_ratio(mw)
    return OK, _report("validate", [cfg.source], valid=True, c1=c1, c=c,
                       vertices=list(mw.graph.vertices), edges=mw.n_edges, dim=mw.dim)


def cmd_attractor(args):
    cfg, mw = _system(args.config)
    h = _resolution(args, cfg, mw)
    partial = False
    try:
        K = solve_invariant_list(mw, h, args.max_iterations)
    except MaxIterationsExceeded as err:
        K, partial = err.best, True
    if args.out:
        write_text(args.out, format_boxes(K.covers, h))
    if args.csv:
        clouds = chaos_game(mw, args.points, args.burn_in, args.seed)
        write_text(args.csv, format_csv(clouds))
    report = _report("attractor", [cfg.source, repr(h)], resolution=h, iterations=K.iterations,
                     residual=K.residual, error_bound=K.error_bound, stationary=K.stationary,
                     partial=partial, cells={v: len(K[v]) for v in K.vertices})
    return (EXHAUSTED if partial else OK), report


def cmd_render(args):
    cfg, mw = _system(args.config)
    if args.mode == "chaos":
        clouds = chaos_game(mw, args.points, args.burn_in, args.seed)
        mask = rasterize_points(mw, clouds, args.width, args.height)
        h = None
    else:
        h = _resolution(args, cfg, mw)
        K = solve_invariant_list(mw, h)
        mask = rasterize_cover(mw, K.covers, args.width, args.height)
    Path(args.out).write_bytes(encode_ppm(mask))
    return OK, _report("render", [cfg.source, args.mode, str(args.seed)], mode=args.mode,
                       resolution=h, width=int(mask.shape[1]), height=int(mask.shape[0]),
                       set_pixels=int(mask.sum()), fraction=float(mask.mean()))


def cmd_classify(args):
    cfg, mw = _system(args.config)
    h = _resolution(args, cfg, mw)
    K = solve_invariant_list(mw, h)
    rep = classify_disconnected(mw, K, args.max_refinements)
    return OK, _report("classify", [cfg.source, repr(h)], **_classification(rep))


def cmd_code(args):
    cfg, mw = _system(args.config)
    g = mw.graph
    h = _resolution(args, cfg, mw)
    K = solve_invariant_list(mw, h)
    prefix = g.parse_path(args.prefix.split()) if args.prefix else ()
    cycle = g.parse_path(args.cycle.split())
    if g.s(cycle[0]) != g.r(cycle[-1]):
        raise ValidationError([("NotACycle", args.cycle)])
    depth = args.depth
    word = list(prefix)
    while len(word) < depth:
        word += list(cycle)
    word = g.check_path(word[:depth])
    eps = args.eps if args.eps else mw.path_ratio(word) * mw.diameter
    point = coding_map(mw, K, word, eps)
    exact = fixed_point(mw, cycle)
    if prefix:
        exact = mw.compose(prefix)(exact)
    return OK, _report("code", [cfg.source, args.prefix or "", args.cycle, str(depth)],
                       prefix=args.prefix or "", cycle=args.cycle, depth=depth, point=point,
                       error_bound=eps, periodic_point=exact,
                       deviation=float(np.linalg.norm(point - exact)),
                       required_depth=required_depth(mw, eps))


def cmd_decide_iso(args):
    cfg1, mw1 = _system(args.config1)
    cfg2, mw2 = _system(args.config2)
    h1, h2 = _resolution(args, cfg1, mw1), _resolution(args, cfg2, mw2)
    d = decide_iso_totally_disconnected(mw1, mw2, h1, h2, tol=args.tol, trials=args.trials,
                                        seed=args.seed, anchor_depth=args.depth)
    fields = dict(verdict=d.verdict, tol=args.tol, note=d.note,
                  classifications=[_classification(r) for r in d.classifications])
    if d.verification is not None:
        fields["verification"] = vars(d.verification) | {"passed": d.verification.passed}
        fields["refutation"] = {"residuals": d.refutation.residuals,
                                "max_residual": d.refutation.max_residual}
    if d.witness is not None:
        fields["witness"] = d.witness
    if d.evidence:
        fields["identity_refutation"] = {" ".join(mw2.graph.edge_names(s)): r
                                         for s, r in d.evidence.items()}
        fields["min_identity_residual"] = min(d.evidence.values())
    if d.certificate is not None and args.out:
        write_text(args.out, format_certificate(d.certificate, mw1))
        fields["certificate"] = str(args.out)
    code = OK if d.verdict == "Isomorphic" else FAIL
    return code, _report("decide-iso", [cfg1.source, cfg2.source, repr(args.tol)], **fields)


def cmd_verify_cert(args):
    cfg1, mw1 = _system(args.config1)
    cfg2, mw2 = _system(args.config2)
    h1, h2 = _resolution(args, cfg1, mw1), _resolution(args, cfg2, mw2)
    K1, K2 = solve_invariant_list(mw1, h1), solve_invariant_list(mw2, h2)
    text = Path(args.cert).read_text()
    cert = parse_certificate(text, mw1, mw2, K1, K2)
    if isinstance(cert.f, AddressMap):
        grids = (anchor_grid(mw1, K1, args.depth), anchor_grid(mw2, K2, args.depth))
    else:
        grids = (SampleGrid.from_cells(mw1, K1), SampleGrid.from_cells(mw2, K2))
    refutation = refute_certificate(cert, mw1, mw2, grids[0], args.tol)
    names = mw1.graph.edge_names(range(mw1.n_edges))
    fields = dict(tol=args.tol, cover_gap=refutation.cover_gap, uncovered=refutation.uncovered,
                  residuals={f"{j},{names[e]}": r for (j, e), r in refutation.residuals.items()},
                  max_residual=refutation.max_residual, refutation_passed=refutation.passed)
    # a cover that is not a partition is reported, not rejected
    fields["overlapping_sets"] = [[i, j] for i, j in itertools.combinations(range(cert.m), 2)
                                  if cert.cover[i].overlaps(cert.cover[j])]
    try:
        report = verify_isomorphism(build_V(cert, mw1, mw2, grids), args.trials, args.tol,
                                    args.seed)
        fields["verification"] = vars(report) | {"passed": report.passed}
        verified = report.passed
    except CertificateInvalid as err:
        fields["verification"] = {"error": str(err), "passed": False}
        verified = False
    passed = refutation.passed and verified
    fields["passed"] = passed
    return (OK if passed else FAIL), _report("verify-cert", [cfg1.source, cfg2.source, text],
                                             **fields)


def _a0(source: str, K):
    if source.startswith("@"):
        values = np.loadtxt(source[1:], ndmin=1)
        out, start = {}, 0
        for v in K.vertices:
            out[v] = values[start:start + len(K[v])]
            start += len(K[v])
        if start != values.size:
            raise ValueError(f"{source[1:]} has {values.size} values, expected {start}")
        return out

    def fn(points, vertex):
        names = {f"x{i}": points[:, i] for i in range(points.shape[1])}
        names["x"] = points[:, 0]
        if points.shape[1] > 1:
            names["y"] = points[:, 1]
        return np.broadcast_to(evaluate(source, names), (len(points),))
    return fn


def cmd_witness(args):
    cfg, mw = _system(args.config)
    h = _resolution(args, cfg, mw)
    K = solve_invariant_list(mw, h)
    bump, rep = aperiodicity_witness(mw, K, _a0(args.a0, K), args.n0, args.eps)
    fields = {k: v for k, v in vars(rep).items() if k != "details"}
    fields.update(passed=rep.passed, a0=args.a0, resolution=h,
                  bump={"vertex": bump.vertex, "center": bump.center, "radius": bump.radius})
    return (OK if rep.passed else FAIL), _report("witness", [cfg.source, args.a0, str(args.n0),
                                                             repr(args.eps)], **fields)


def timed(fn, args):
    start = time.perf_counter()
    code, report = fn(args)
    report["timing_s"] = round(time.perf_counter() - start, 6)
    return code, report
