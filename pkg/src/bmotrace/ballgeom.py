"""Discrete ball geometry shared by every seminorm engine.

A discrete ball of radius r around a point p collects the grid cells
whose centers lie within Euclidean distance r of p.  All membership
tests run in half-cell integer units so engines and oracles can agree
exactly: a cell offset D (in cells) relative to an anchor cell belongs
to the ball iff

    sum_k (2*D_k - s_k)**2 <= q,      q = 4*(r/h)**2,

where s is the anchor shift: the zero vector for balls centered on a
cell, +-e_k for balls centered on the midpoint of the face between the
anchor cell and its neighbor along axis k.  Radii from the standard
ladder make q an exact integer, so there is no floating-point fuzz in
membership.

Cells are stored in row-major order of the offset (last axis fastest).
That order is part of the contract: kernels accumulate sums over it
sequentially, left to right, and the brute-force oracle reproduces the
same order via plain boolean indexing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["BallTable", "BallCache", "radius_ladder", "ladder_q"]


@dataclass
class BallTable:
    """Offset table of one discrete ball on a fixed array shape.

    coords:    (K, nd) int64 cell offsets, row-major order
    offs:      (K,) flat offsets (coords @ strides)
    run_fixed: (R, nd-1) leading-axis offsets of each contiguous run
    run_lo/hi: (R,) first/last offset along the final axis (inclusive)
    run_off:   (R,) flat offset of the first cell of each run
    run_len:   (R,) run lengths; sum(run_len) == K
    """

    q: float
    shift: tuple[int, ...]
    shape_arr: np.ndarray
    strides_arr: np.ndarray
    coords: np.ndarray
    offs: np.ndarray
    run_fixed: np.ndarray
    run_lo: np.ndarray
    run_hi: np.ndarray
    run_off: np.ndarray
    run_len: np.ndarray
    count: int = field(init=False)

    def __post_init__(self) -> None:
        self.count = int(self.coords.shape[0])

    @property
    def max_extent(self) -> int:
        """Largest |offset| along any axis (for bounds reasoning)."""
        if self.count == 0:
            return 0
        return int(np.abs(self.coords).max())


def _row_major_strides(shape: tuple[int, ...]) -> np.ndarray:
    nd = len(shape)
    strides = np.ones(nd, dtype=np.int64)
    for k in range(nd - 2, -1, -1):
        strides[k] = strides[k + 1] * shape[k + 1]
    return strides


def build_ball_table(q: float, shift: tuple[int, ...], shape: tuple[int, ...]) -> BallTable:
    nd = len(shape)
    if len(shift) != nd:
        raise ValueError(f"shift has {len(shift)} entries for a {nd}-d shape")
    # |2D - s| <= sqrt(q) per axis bounds the search box
    half = int(math.floor((math.sqrt(q) + 1.0) / 2.0)) + 1
    axes = [np.arange(-half, half + 1, dtype=np.int64) for _ in range(nd)]
    mesh = np.meshgrid(*axes, indexing="ij")
    offsets = np.stack([m.ravel() for m in mesh], axis=1)  # row-major
    s = np.asarray(shift, dtype=np.int64)
    t = ((2 * offsets - s) ** 2).sum(axis=1)
    coords = offsets[t <= q]
    k = coords.shape[0]

    strides = _row_major_strides(shape)
    offs = coords @ strides

    # contiguous runs along the last axis; the ball is convex so each
    # leading-offset combination yields exactly one run
    if k == 0:
        empty2 = np.empty((0, nd - 1), dtype=np.int64)
        empty1 = np.empty(0, dtype=np.int64)
        return BallTable(q, tuple(shift), np.asarray(shape, dtype=np.int64), strides,
                         coords, offs, empty2, empty1, empty1, empty1, empty1)
    lead = coords[:, :-1]
    new_run = np.ones(k, dtype=bool)
    if nd > 1:
        new_run[1:] = np.any(lead[1:] != lead[:-1], axis=1)
    else:
        new_run[1:] = False
    starts = np.flatnonzero(new_run)
    ends = np.append(starts[1:], k) - 1
    run_fixed = np.ascontiguousarray(lead[starts])
    run_lo = coords[starts, -1].copy()
    run_hi = coords[ends, -1].copy()
    run_len = run_hi - run_lo + 1
    if int(run_len.sum()) != k:
        raise AssertionError("ball run decomposition is not contiguous")
    run_off = run_fixed @ strides[:-1] + run_lo * strides[-1]
    return BallTable(q, tuple(shift), np.asarray(shape, dtype=np.int64), strides,
                     coords, offs, run_fixed, run_lo, run_hi,
                     np.ascontiguousarray(run_off), np.ascontiguousarray(run_len))


class BallCache:
    """Memo of ball tables for one array shape."""

    def __init__(self, shape: tuple[int, ...]):
        self.shape = tuple(int(n) for n in shape)
        self.strides = _row_major_strides(self.shape)
        self._tables: dict[tuple[float, tuple[int, ...]], BallTable] = {}

    def table(self, q: float, shift: tuple[int, ...] | None = None) -> BallTable:
        nd = len(self.shape)
        key_shift = tuple(shift) if shift is not None else (0,) * nd
        key = (float(q), key_shift)
        tab = self._tables.get(key)
        if tab is None:
            tab = build_ball_table(q, key_shift, self.shape)
            self._tables[key] = tab
        return tab


def radius_ladder(h: float, bound: float, cap: float) -> np.ndarray:
    """Squared test radii in cell units: r^2/h^2 = 4 * 2^k.

    The ladder starts at r = 2h and grows by factor sqrt(2); it stops at
    min(bound, cap).  Returned values are exact int64, so ladders for
    nested bounds are literal prefixes of each other and monotonicity in
    the bound holds exactly.
    """
    lim = min(bound, cap)
    if not lim > 0:
        return np.empty(0, dtype=np.int64)
    out = []
    r2 = 4
    # compare in squared world units; (r/h)^2 <= (lim/h)^2
    lim_sq = (lim / h) ** 2
    while r2 <= lim_sq:
        out.append(r2)
        r2 *= 2
    return np.asarray(out, dtype=np.int64)


def ladder_q(r2_cells: int) -> int:
    """Half-unit membership threshold for a ladder radius."""
    return 4 * int(r2_cells)
