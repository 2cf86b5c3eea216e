"""Brute-force reference implementations of the seminorm engines.

Everything here enumerates balls by testing the membership inequality
over the whole coordinate array with boolean indexing, no offset tables,
no run decomposition, no containment-radius transform.  It shares only
the canonical contract with the fast engines: half-cell integer
membership, row-major sequential accumulation (np.cumsum, which sums
left to right, unlike np.sum's pairwise tree), the same value formulas,
the same strict-improvement scan order, and witness None at sup 0.
The acceptance gate requires engine == oracle bitwise on small grids.
"""

from __future__ import annotations

import numpy as np

from .ballgeom import radius_ladder
from .grids import GridDomain

__all__ = ["oracle_bmo", "oracle_b", "oracle_l1_ul", "oracle_miyachi"]


def _seq(vals: np.ndarray) -> float:
    if vals.size == 0:
        return 0.0
    return float(np.cumsum(vals)[-1])


def _scan_finish(best, witness):
    return (best, None) if best == 0.0 else (best, witness)


def _coords(dom: GridDomain) -> np.ndarray:
    g = dom.grid
    return np.stack(np.meshgrid(*[np.arange(n) for n in g.shape],
                                indexing="ij"), axis=-1).reshape(-1, g.dim)


def _ball_offsets(q: int, dim: int, factor: int = 1) -> np.ndarray:
    """Row-major offsets D with sum (2*factor*D)^2 <= q*factor^2, i.e.
    the radius-sqrt(q)/2 ball scaled by factor."""
    half = int(np.floor(np.sqrt(q) * factor / 2.0)) + 1
    axes = [np.arange(-half, half + 1) for _ in range(dim)]
    offs = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, dim)
    t = (4 * offs ** 2).sum(axis=1)
    return offs[t <= q * factor ** 2]


def _strides(shape) -> np.ndarray:
    return np.asarray([int(np.prod(shape[k + 1:])) for k in range(len(shape))],
                      dtype=np.int64)


def oracle_bmo(f: np.ndarray, dom: GridDomain, mu: float = np.inf,
               mask: np.ndarray | None = None):
    g = dom.grid
    fv = np.asarray(f, dtype=np.float64).reshape(-1)
    m = (dom.mask if mask is None else np.asarray(mask, dtype=bool)).reshape(-1)
    coords = _coords(dom)
    occupied = np.flatnonzero(m)
    shape_arr = np.asarray(g.shape)
    strides = _strides(g.shape)
    best, witness, checked = 0.0, None, 0
    for r2 in radius_ladder(g.h, mu, g.diameter):
        q = 4 * int(r2)
        offs = _ball_offsets(q, g.dim)
        for c in occupied:
            cells = coords[c] + offs
            if ((cells < 0) | (cells >= shape_arr)).any():
                continue  # exits the grid: exterior is complement
            flat = cells @ strides
            if not m[flat].all():
                continue
            vals = fv[flat]  # ascending flat order == row-major
            k = vals.size
            mean = _seq(vals) / k
            value = _seq(np.abs(vals - mean)) / k
            checked += 1
            if value > best:
                best = value
                cw = g.world(coords[c])
                witness = {"center": [float(x) for x in cw],
                           "radius": g.h * float(np.sqrt(r2)),
                           "r2_cells": int(r2)}
    best, witness = _scan_finish(best, witness)
    return best, witness, checked


def oracle_b(f: np.ndarray, dom: GridDomain, nu: float = np.inf,
             component: int | None = None):
    g = dom.grid
    nd = g.dim
    fv = np.asarray(f, dtype=np.float64).reshape(-1)
    m = dom.mask.reshape(-1)
    bnd = dom.boundary
    coords = _coords(dom)
    best, witness, checked = 0.0, None, 0
    for r2 in radius_ladder(g.h, nu, g.diameter):
        q = 4 * int(r2)
        denom = float(r2) ** (nd / 2.0)
        for j in range(bnd.count):
            if component is not None and bnd.components[j] != component:
                continue
            s = np.zeros(nd, dtype=np.int64)
            s[bnd.axes[j]] = bnd.signs[j]
            t = ((2 * (coords - bnd.anchors[j]) - s) ** 2).sum(axis=1)
            member = t <= q
            vals = np.abs(fv[member & m])
            value = _seq(vals) / denom
            checked += 1
            if value > best:
                best = value
                witness = {"center": [float(x) for x in bnd.positions[j]],
                           "radius": g.h * float(np.sqrt(r2)),
                           "r2_cells": int(r2), "face": j,
                           "component": int(bnd.components[j])}
    best, witness = _scan_finish(best, witness)
    return best, witness, checked


def oracle_l1_ul(f: np.ndarray, dom: GridDomain, region: np.ndarray,
                 r0: float = 1.0):
    g = dom.grid
    nd = g.dim
    fv = np.asarray(f, dtype=np.float64).reshape(-1)
    reg = np.asarray(region, dtype=bool).reshape(-1)
    coords = _coords(dom)
    q = 4.0 * (r0 / g.h) ** 2
    best, witness, checked = 0.0, None, 0
    for c in range(coords.shape[0]):
        t = ((2 * (coords - coords[c])) ** 2).sum(axis=1)
        vals = np.abs(fv[(t <= q) & reg])
        value = _seq(vals) * g.h ** nd
        checked += 1
        if value > best:
            best = value
            cw = g.world(coords[c])
            witness = {"center": [float(x) for x in cw], "radius": float(r0)}
    best, witness = _scan_finish(best, witness)
    return best, witness, checked


def oracle_miyachi(f: np.ndarray, dom: GridDomain, cap: float = np.inf):
    """Returns (osc_value, b_value, total) with the double-ball and
    five-ball constraints checked by direct enumeration, counting cells
    outside the grid as complement."""
    g = dom.grid
    fv = np.asarray(f, dtype=np.float64).reshape(-1)
    m = dom.mask.reshape(-1)
    coords = _coords(dom)
    occupied = np.flatnonzero(m)
    shape_arr = np.asarray(g.shape)
    strides = _strides(g.shape)
    best_osc, wit_osc = 0.0, None
    best_b, wit_b = 0.0, None
    for r2 in radius_ladder(g.h, cap, g.diameter):
        r2 = int(r2)
        q = 4 * r2
        offs1 = _ball_offsets(q, g.dim)
        offs2 = _ball_offsets(q, g.dim, factor=2)
        offs5 = _ball_offsets(q, g.dim, factor=5)
        for c in occupied:
            cells2 = coords[c] + offs2
            if ((cells2 < 0) | (cells2 >= shape_arr)).any():
                continue  # double ball exits the grid
            if not m[cells2 @ strides].all():
                continue  # double ball leaks out of the mask
            vals = fv[(coords[c] + offs1) @ strides]
            k = vals.size
            mean = _seq(vals) / k
            value = _seq(np.abs(vals - mean)) / k
            if value > best_osc:
                best_osc = value
                cw = g.world(coords[c])
                wit_osc = {"center": [float(x) for x in cw],
                           "radius": g.h * float(np.sqrt(r2)),
                           "r2_cells": r2}
            cells5 = coords[c] + offs5
            inside = ((cells5 >= 0) & (cells5 < shape_arr)).all(axis=1)
            leaks = (~inside).any()
            if not leaks:
                leaks = not m[cells5 @ strides].all()
            if leaks:
                value_b = _seq(np.abs(vals)) / k
                if value_b > best_b:
                    best_b = value_b
                    cw = g.world(coords[c])
                    wit_b = {"center": [float(x) for x in cw],
                             "radius": g.h * float(np.sqrt(r2)),
                             "r2_cells": r2}
    best_osc, wit_osc = _scan_finish(best_osc, wit_osc)
    best_b, wit_b = _scan_finish(best_b, wit_b)
    return {"osc": best_osc, "osc_witness": wit_osc,
            "b": best_b, "b_witness": wit_b,
            "total": best_osc + best_b}
