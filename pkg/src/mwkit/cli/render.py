"""Rasterisation to binary PPM (P6, 8-bit).

Each vertex gets its own panel of ``width x height`` pixels covering its
ambient box; panels are placed side by side in vertex order.  A pixel is
set (black on white) when its interior meets an occupied cell, or when
a sample point falls inside it.  Row 0 is the top of the box.
"""

from __future__ import annotations

import numpy as np

from ..geometry import SNAP
from ..mw_graph import MWGraph

FOREGROUND = 0
BACKGROUND = 255


def _pixel_ranges(lo, hi, origin, size, n):
    """Inclusive pixel index ranges whose interior meets [lo, hi] along one axis."""
    a = np.floor((lo - origin) / size + SNAP).astype(np.int64)
    b = np.ceil((hi - origin) / size - SNAP).astype(np.int64) - 1
    b = np.maximum(a, b)
    return np.clip(a, 0, n - 1), np.clip(b, 0, n - 1)


def rasterize_cover(mw: MWGraph, covers: dict, width: int, height: int) -> np.ndarray:
    """Boolean mask (height, width * |V|): pixels whose interior meets a cell."""
    if mw.dim > 2:
        raise ValueError("only 1-D and 2-D systems can be rendered")
    panels = []
    for v in mw.graph.vertices:
        box, cover = mw.ambient[v], covers[v]
        blo, ext = np.asarray(box.lo), np.asarray(box.extent)
        x0, x1 = _pixel_ranges(cover.lo[:, 0], cover.hi[:, 0], blo[0], ext[0] / width, width)
        if mw.dim == 1:
            y0 = np.zeros_like(x0)
            y1 = np.full_like(x0, height - 1)
        else:
            # row 0 is the top edge, so flip the y axis
            top = blo[1] + ext[1]
            y0, y1 = _pixel_ranges(top - cover.hi[:, 1], top - cover.lo[:, 1], 0.0,
                                   ext[1] / height, height)
        mask = np.zeros((height, width), dtype=bool)
        for dx in range(int((x1 - x0).max()) + 1):
            for dy in range(int((y1 - y0).max()) + 1):
                ok = (x0 + dx <= x1) & (y0 + dy <= y1)
                mask[y0[ok] + dy, x0[ok] + dx] = True
        panels.append(mask)
    return np.hstack(panels)


def rasterize_points(mw: MWGraph, clouds: dict, width: int, height: int) -> np.ndarray:
    if mw.dim > 2:
        raise ValueError("only 1-D and 2-D systems can be rendered")
    panels = []
    for v in mw.graph.vertices:
        box = mw.ambient[v]
        mask = np.zeros((height, width), dtype=bool)
        pts = clouds[v].points
        u = (pts - np.asarray(box.lo)) / np.asarray(box.extent)
        col = np.clip((u[:, 0] * width).astype(np.int64), 0, width - 1)
        if mw.dim == 1:
            mask[:, col] = True
        else:
            row = np.clip(((1 - u[:, 1]) * height).astype(np.int64), 0, height - 1)
            mask[row, col] = True
        panels.append(mask)
    return np.hstack(panels)


def encode_ppm(mask: np.ndarray) -> bytes:
    h, w = mask.shape
    pixels = np.where(mask, FOREGROUND, BACKGROUND).astype(np.uint8)
    rgb = np.repeat(pixels[:, :, None], 3, axis=2)
    return f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.tobytes()


def decode_ppm(data: bytes) -> np.ndarray:
    """Mask of foreground pixels from a P6 file written by ``encode_ppm``."""
    fields, pos = [], 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        fields.append(data[pos:end].decode("ascii"))
        pos = end
    if fields[0] != "P6" or fields[3] != "255":
        raise ValueError("not an 8-bit binary PPM")
    w, h = int(fields[1]), int(fields[2])
    rgb = np.frombuffer(data[pos + 1:pos + 1 + 3 * w * h], dtype=np.uint8).reshape(h, w, 3)
    return (rgb < 128).all(axis=2)
