"""Deterministic artifact I/O: canonical JSON with fixed-precision
floats, binary f64 grids with JSON headers, CSV tables, and
hand-assembled SVG renderings.

Identical inputs must produce byte-identical files, so no timestamps,
no dict-order dependence, and all floats printed with %.17g.
"""

from __future__ import annotations

import json
import math
import zlib
from pathlib import Path

import numpy as np

__all__ = ["fmt_float", "dumps_canonical", "save_json", "load_json",
           "save_field", "load_field", "save_mask", "load_mask",
           "write_csv", "whitney_svg", "witness_svg"]


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return "%.17g" % x


def _ser(obj, out: list, indent: int, level: int):
    pad = " " * (indent * level)
    pad1 = " " * (indent * (level + 1))
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        keys = sorted(obj, key=str)
        for i, k in enumerate(keys):
            out.append(pad1 + json.dumps(str(k)) + ": ")
            _ser(obj[k], out, indent, level + 1)
            out.append(",\n" if i + 1 < len(keys) else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            out.append("[]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad1)
            _ser(v, out, indent, level + 1)
            out.append(",\n" if i + 1 < len(obj) else "\n")
        out.append(pad + "]")
    elif isinstance(obj, bool) or isinstance(obj, np.bool_):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(fmt_float(float(obj)))
    elif obj is None:
        out.append("null")
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, np.ndarray):
        _ser(obj.tolist(), out, indent, level)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_canonical(obj, indent: int = 2) -> str:
    out: list = []
    _ser(obj, out, indent, 0)
    out.append("\n")
    return "".join(out)


def save_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps_canonical(obj))
    return path


def load_json(path):
    return json.loads(Path(path).read_text())


def _header(grid, dtype: str) -> dict:
    return {"dim": grid.dim, "shape": list(grid.shape),
            "spacing": grid.h, "origin": list(grid.origin),
            "dtype": dtype, "order": "C"}


def save_field(path_base, array: np.ndarray, grid) -> tuple:
    """Binary little-endian f64 dump plus a JSON header describing the
    grid; returns (header path, data path)."""
    base = Path(path_base)
    arr = np.ascontiguousarray(np.asarray(array, dtype="<f8"))
    if tuple(arr.shape) != tuple(grid.shape):
        raise ValueError("array shape does not match the grid")
    data = base.with_suffix(".bin")
    data.write_bytes(arr.tobytes(order="C"))
    hdr = _header(grid, "<f8")
    hdr["crc32"] = zlib.crc32(arr.tobytes(order="C"))
    hpath = base.with_suffix(".json")
    save_json(hpath, hdr)
    return hpath, data


def load_field(path_base) -> tuple:
    base = Path(path_base)
    hdr = load_json(base.with_suffix(".json"))
    raw = base.with_suffix(".bin").read_bytes()
    arr = np.frombuffer(raw, dtype=hdr["dtype"]).reshape(hdr["shape"])
    if hdr.get("crc32") is not None and zlib.crc32(raw) != hdr["crc32"]:
        raise ValueError("field data failed its checksum")
    return arr, hdr


def save_mask(path_base, mask: np.ndarray, grid) -> tuple:
    base = Path(path_base)
    arr = np.ascontiguousarray(np.asarray(mask, dtype=np.uint8))
    data = base.with_suffix(".bin")
    data.write_bytes(arr.tobytes(order="C"))
    hdr = _header(grid, "u1")
    hdr["crc32"] = zlib.crc32(arr.tobytes(order="C"))
    hpath = base.with_suffix(".json")
    save_json(hpath, hdr)
    return hpath, data


def load_mask(path_base) -> tuple:
    arr, hdr = load_field(path_base)
    return arr.astype(bool), hdr


def write_csv(path, header: list, rows: list) -> Path:
    """CSV with a header row; floats at fixed precision."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(fmt_float(float(v)))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


# -- SVG rendering ---------------------------------------------------------

_SVG_HEAD = ('<svg xmlns="http://www.w3.org/2000/svg" viewBox="%s" '
             'width="640" height="640">\n')


def _viewbox(lo, hi) -> str:
    w, h = hi[0] - lo[0], hi[1] - lo[1]
    return "%s %s %s %s" % (fmt_float(lo[0]), fmt_float(-hi[1]),
                            fmt_float(w), fmt_float(h))


_PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def whitney_svg(dec, path) -> Path:
    """Cube outlines colored by level (y flipped so the plot reads in
    math orientation)."""
    if dec.cubes and len(dec.cubes[0].index) != 2:
        raise ValueError("SVG rendering is two-dimensional")
    los = np.array([c.lo for c in dec.cubes])
    his = np.array([c.hi for c in dec.cubes])
    lo = los.min(axis=0)
    hi = his.max(axis=0)
    parts = [_SVG_HEAD % _viewbox(lo, hi)]
    stroke = (hi - lo).max() / 800.0
    for c in dec.cubes:
        color = _PALETTE[c.level % len(_PALETTE)]
        parts.append(
            '<rect x="%s" y="%s" width="%s" height="%s" fill="%s" '
            'fill-opacity="0.35" stroke="black" stroke-width="%s"/>\n'
            % (fmt_float(c.lo[0]), fmt_float(-c.hi[1]), fmt_float(c.side),
               fmt_float(c.side), color, fmt_float(stroke)))
    parts.append("</svg>\n")
    path = Path(path)
    path.write_text("".join(parts))
    return path


def witness_svg(dom, report, path) -> Path:
    """Domain mask cells plus the witness ball of a seminorm report."""
    if dom.grid.dim != 2:
        raise ValueError("SVG rendering is two-dimensional")
    g = dom.grid
    lo, hi = g.bbox
    parts = [_SVG_HEAD % _viewbox(lo, hi)]
    cells = np.argwhere(dom.mask)
    for ij in cells:
        x = g.origin[0] + ij[0] * g.h - 0.5 * g.h
        y = g.origin[1] + ij[1] * g.h - 0.5 * g.h
        parts.append('<rect x="%s" y="%s" width="%s" height="%s" '
                     'fill="#cfe8f3"/>\n' % (fmt_float(x), fmt_float(-(y + g.h)),
                                             fmt_float(g.h), fmt_float(g.h)))
    w = getattr(report, "witness", None)
    if w is None and isinstance(report, dict):
        w = report.get("witness")
    if w is not None:
        cx, cy = w["center"]
        parts.append('<circle cx="%s" cy="%s" r="%s" fill="none" '
                     'stroke="#d62728" stroke-width="%s"/>\n'
                     % (fmt_float(cx), fmt_float(-cy), fmt_float(w["radius"]),
                        fmt_float(g.h / 3)))
    parts.append("</svg>\n")
    path = Path(path)
    path.write_text("".join(parts))
    return path
