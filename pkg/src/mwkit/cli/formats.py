"""Readers and writers for ``.boxes``, ``.csv``, ``.cert`` and ``.report`` files.

Grammars are documented in docs/formats.md.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from ..attractor import InvariantList
from ..errors import CertificateInvalid, CertificateParse, DimensionMismatch
from ..geometry import TaggedBoxSet
from ..mw_graph import AffineMap, MWGraph
from ..correspondence import AddressMap, AffinePointMap, ConjugacyCertificate, CoverSet

BOXES_MAGIC = "mwkit-boxes 1"
CERT_MAGIC = "mwkit-certificate 1"


# box lists ---------------------------------------------------------------------


def format_boxes(covers: dict, h: float) -> str:
    lines = [BOXES_MAGIC, f"resolution {h!r}"]
    for v, c in covers.items():
        origin = " ".join(repr(x) for x in c.origin)
        shape = " ".join(str(n) for n in c.shape)
        lines.append(f"vertex {v} | {origin} | {shape} | {len(c)}")
        lines += [" ".join(str(int(i)) for i in row) for row in c.indices]
    return "\n".join(lines) + "\n"


def parse_boxes(text: str) -> tuple:
    """(covers dict, resolution)."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != BOXES_MAGIC:
        raise ValueError("not a box list")
    h = float(lines[1].split()[1])
    covers, i = {}, 2
    while i < len(lines):
        head = [p.strip() for p in lines[i].split("|")]
        v = head[0].split(None, 1)[1]
        origin = [float(x) for x in head[1].split()]
        shape = tuple(int(x) for x in head[2].split())
        count = int(head[3])
        idx = [[int(x) for x in ln.split()] for ln in lines[i + 1:i + 1 + count]]
        covers[v] = TaggedBoxSet.from_indices(v, origin, h, shape, idx)
        i += 1 + count
    return covers, h


# point clouds ------------------------------------------------------------------------


def format_csv(clouds: dict) -> str:
    d = next(iter(clouds.values())).dim
    lines = ["vertex," + ",".join(f"x{i}" for i in range(d))]
    for v, cloud in clouds.items():
        lines += [v + "," + ",".join(repr(float(x)) for x in p) for p in cloud.points]
    return "\n".join(lines) + "\n"


# certificates ----------------------------------------------------------------------


def _nums(xs) -> str:
    return " ".join(repr(float(x)) for x in np.ravel(xs))


def format_certificate(cert: ConjugacyCertificate, mw1: MWGraph) -> str:
    names = [e.name for e in mw1.graph.edges]
    f = cert.f
    lines = [CERT_MAGIC, "edges " + " ".join(names)]
    if isinstance(f, AffinePointMap):
        lines.append("map affine")
        lines.append("matrix " + "; ".join(_nums(r) for r in f.phi.matrix))
        lines.append("offset " + _nums(f.phi.offset))
    elif isinstance(f, AddressMap):
        lines.append("map address")
        lines.append(f"depth {f.depth}")
    else:
        raise TypeError(f"cannot serialise map {type(f).__name__}")
    lines.append("vertex_map " + " ".join(f"{v}={w}" for v, w in f.vertex_map.items()))
    lines.append(f"sets {cert.m}")
    for cover, sigma in zip(cert.cover, cert.sigmas):
        lines.append("set all" if cover.is_all else "set cells")
        lines.append("sigma " + " ".join(names[s] for s in sigma))
        if not cover.is_all:
            for v, c in cover.cells.items():
                lines.append(f"grid {v} | {c.h!r} | {_nums(c.origin)} | "
                             + " ".join(str(n) for n in c.shape))
                lines.append(f"cells {v} | " + " ".join(str(int(i)) for i in c.flat))
    return "\n".join(lines) + "\n"


class _Lines:
    def __init__(self, text: str):
        self.items = [(n, ln.split("#", 1)[0].strip()) for n, ln in
                      enumerate(text.splitlines(), start=1)]
        self.items = [(n, ln) for n, ln in self.items if ln]
        self.pos = 0

    def peek(self):
        return self.items[self.pos] if self.pos < len(self.items) else (None, "")

    def take(self, keyword: str) -> tuple:
        n, ln = self.peek()
        word, _, rest = ln.partition(" ")
        if word != keyword:
            raise CertificateParse(f"expected '{keyword}', found {ln!r}", n, keyword)
        self.pos += 1
        return n, rest.strip()


def parse_certificate(text: str, mw1: MWGraph, mw2: MWGraph, K1: InvariantList,
                      K2: InvariantList) -> ConjugacyCertificate:
    """Parse a ``.cert`` file; address maps are rebuilt against (K1, K2)."""
    src = _Lines(text)
    n, first = src.peek()
    if first != CERT_MAGIC:
        raise CertificateParse("missing certificate header", n, "header")
    src.pos += 1
    n, rest = src.take("edges")
    names = rest.split()
    known = [e.name for e in mw1.graph.edges]
    if names != known:
        raise CertificateParse(f"edges {names} do not match the system's {known}", n, "edges")
    index = {name: i for i, name in enumerate(names)}
    n, kind = src.take("map")
    try:
        if kind == "affine":
            _, mat = src.take("matrix")
            _, off = src.take("offset")
            rows = [[float(x) for x in r.split()] for r in mat.split(";")]
            phi = AffineMap.make(rows, [float(x) for x in off.split()])
            f_kind = ("affine", phi)
        elif kind == "address":
            _, depth = src.take("depth")
            f_kind = ("address", int(depth))
        else:
            raise CertificateParse(f"unknown map kind {kind!r}", n, "map")
        n, vm = src.take("vertex_map")
        vertex_map = dict(pair.split("=", 1) for pair in vm.split())
        n, m = src.take("sets")
        cover, sigmas = [], []
        for _ in range(int(m)):
            n, how = src.take("set")
            n, sig = src.take("sigma")
            sigma = [index[s] for s in sig.split()]
            if how == "all":
                cover.append(CoverSet())
            elif how == "cells":
                cells = {}
                while src.peek()[1].startswith("grid "):
                    n, grid = src.take("grid")
                    parts = [p.strip() for p in grid.split("|")]
                    v, h = parts[0], float(parts[1])
                    origin = [float(x) for x in parts[2].split()]
                    shape = tuple(int(x) for x in parts[3].split())
                    n, body = src.take("cells")
                    v2, flat = [p.strip() for p in body.split("|")]
                    if v2 != v:
                        raise CertificateParse("cells line names another vertex", n, "cells")
                    cells[v] = TaggedBoxSet.from_flat(v, origin, h, shape,
                                                      [int(x) for x in flat.split()])
                cover.append(CoverSet(cells))
            else:
                raise CertificateParse(f"unknown set kind {how!r}", n, "set")
            sigmas.append(sigma)
    except (ValueError, KeyError, IndexError, DimensionMismatch) as err:
        raise CertificateParse(f"malformed certificate: {err}", n) from None
    if src.pos != len(src.items):
        raise CertificateParse("trailing content", src.peek()[0])
    if f_kind[0] == "affine":
        f = AffinePointMap(f_kind[1], vertex_map)
    else:
        f = AddressMap(mw1, K1, mw2, K2, f_kind[1], vertex_map)
    try:
        return ConjugacyCertificate(f, cover, sigmas)
    except CertificateInvalid as err:
        raise CertificateParse(str(err)) from None


# reports -----------------------------------------------------------------------------


def digest(*texts: str) -> str:
    h = hashlib.sha256()
    for t in texts:
        h.update(t.encode())
        h.update(b"\0")
    return h.hexdigest()


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k) if not isinstance(k, tuple) else ",".join(map(str, k)): to_jsonable(v)
                for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(x) for x in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def format_report(report: dict) -> str:
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2) + "\n"


def parse_report(text: str) -> dict:
    return json.loads(text)


def write_text(path, text: str):
    Path(path).write_text(text)
