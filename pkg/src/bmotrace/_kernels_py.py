"""Pure-numpy fallback kernels.

Mirrors the compiled module bit for bit: cells are visited in row-major
offset order and reduced with cumsum, whose last entry equals a
sequential left-to-right accumulation exactly.
"""

from __future__ import annotations

import numpy as np


def _seq_sum(vals: np.ndarray) -> float:
    if vals.size == 0:
        return 0.0
    return float(np.cumsum(vals)[-1])


def osc_sums(f: np.ndarray, centers: np.ndarray, table) -> np.ndarray:
    offs = table.offs
    count = table.count
    out = np.empty(centers.shape[0], dtype=np.float64)
    for i in range(centers.shape[0]):
        vals = f[centers[i] + offs]
        mean = _seq_sum(vals) / count
        out[i] = _seq_sum(np.abs(vals - mean))
    return out


def abs_sums(f: np.ndarray, centers: np.ndarray, table) -> np.ndarray:
    offs = table.offs
    out = np.empty(centers.shape[0], dtype=np.float64)
    for i in range(centers.shape[0]):
        out[i] = _seq_sum(np.abs(f[centers[i] + offs]))
    return out


def masked_abs_sums(f: np.ndarray, mask: np.ndarray,
                    anchors: np.ndarray, table) -> np.ndarray:
    coords = table.coords
    shape = table.shape_arr
    strides = table.strides_arr
    out = np.empty(anchors.shape[0], dtype=np.float64)
    for i in range(anchors.shape[0]):
        pos = anchors[i] + coords
        ok = np.all((pos >= 0) & (pos < shape), axis=1)
        flat = pos[ok] @ strides
        flat = flat[mask[flat] != 0]
        out[i] = _seq_sum(np.abs(f[flat]))
    return out
