"""Dyadic decomposition: cube algebra, certificates, chain distances."""

import math
from collections import deque

import numpy as np
import pytest

import bmotrace.whitney as wh
from bmotrace.shapes import shape_from_spec

DISK = {"type": "disk", "params": {"center": [0.0, 0.0], "radius": 1.0}}


def _disk_dec(max_level=5, **kw):
    return wh.whitney_decompose(shape_from_spec(DISK), max_level=max_level, **kw)


def test_dyadic_cube_geometry():
    c = wh.DyadicCube(2, (3, 1))
    assert c.side == 0.25
    np.testing.assert_array_equal(c.lo, [0.75, 0.25])
    np.testing.assert_array_equal(c.hi, [1.0, 0.5])
    np.testing.assert_array_equal(c.center, [0.875, 0.375])
    kids = list(c.children())
    assert len(kids) == 4
    assert all(k.level == 3 for k in kids)
    assert {k.index for k in kids} == {(6, 2), (6, 3), (7, 2), (7, 3)}
    assert kids[0].ancestor_index(2) == (3, 1)


def test_cube_gap_exact_arithmetic():
    a = wh.DyadicCube(0, (0, 0))
    assert wh.cube_gap(a, wh.DyadicCube(0, (1, 0))) == 0.0
    assert wh.cube_gap(a, wh.DyadicCube(0, (1, 1))) == 0.0  # corner touch
    assert wh.cube_gap(a, wh.DyadicCube(0, (2, 0))) == 1.0
    assert wh.cube_gap(a, wh.DyadicCube(1, (4, 0))) == 1.0
    # mixed levels, unit gap along one axis
    b = wh.DyadicCube(2, (8, 0))
    assert wh.cube_gap(a, b) == 1.0


def test_log_distance_closed_form():
    """Unit gap between a side-1 and a side-1/4 cube."""
    dec = _disk_dec(max_level=3)
    a = wh.DyadicCube(0, (0, 0))
    b = wh.DyadicCube(2, (8, 0))
    want = math.log(4.0) + math.log(9.0 / 5.0)
    assert wh.d2(dec, a, b) == pytest.approx(want, rel=1e-15)
    assert wh.d2(dec, a, a) == 0.0
    # symmetric in the pair
    assert wh.d2(dec, b, a) == wh.d2(dec, a, b)


@pytest.mark.parametrize("spec", [
    {"type": "square", "params": {"side": 1.0}},
    DISK,
    {"type": "annulus", "params": {"r_inner": 0.4, "r_outer": 1.0}},
    {"type": "l_shape"},
    {"type": "perturbed_halfspace"},
])
def test_certificate_holds_on_standard_shapes(spec):
    dec = wh.whitney_decompose(shape_from_spec(spec), max_level=6)
    cert = dec.certificate
    assert cert.all_ok
    assert cert.violations == []
    nd = dec.cubes[0].dim
    assert math.sqrt(nd) <= cert.rho_min <= cert.rho_max < 4 * math.sqrt(nd)
    assert cert.ratio_max <= 4
    assert dec.truncated  # analytic boundary always exhausts max_level
    assert all(c.side == 2.0 ** -c.level for c in dec.cubes)


def test_translation_invariance():
    """Shifting the region by an integer shifts every cube index."""
    base = _disk_dec()
    moved = wh.whitney_decompose(
        shape_from_spec({"type": "disk",
                         "params": {"center": [2.0, 0.0], "radius": 1.0}}),
        max_level=5)

    def shift(c):
        s = 2 * 2.0 ** c.level
        assert s == int(s)
        return wh.DyadicCube(c.level, (c.index[0] + int(s), c.index[1]))

    assert {shift(c) for c in base.cubes} == set(moved.cubes)


def test_dilation_invariance():
    """Doubling the region shifts every cube one level coarser."""
    base = _disk_dec(max_level=5)
    big = wh.whitney_decompose(
        shape_from_spec({"type": "disk",
                         "params": {"center": [0.0, 0.0], "radius": 2.0}}),
        max_level=4)
    assert {wh.DyadicCube(c.level - 1, c.index) for c in base.cubes} \
        == set(big.cubes)


def test_chain_distance_matches_reference_bfs():
    dec = _disk_dec()
    cubes = dec.cubes
    n = len(cubes)
    # independent adjacency: closed cubes touch iff their gap vanishes
    adj = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if wh.cube_gap(cubes[i], cubes[j]) == 0.0:
                adj[i].append(j)
                adj[j].append(i)
    ref = np.full(n, -1, dtype=np.int64)
    ref[0] = 0
    q = deque([0])
    while q:
        i = q.popleft()
        for j in adj[i]:
            if ref[j] < 0:
                ref[j] = ref[i] + 1
                q.append(j)
    np.testing.assert_array_equal(wh.d1_from(dec, cubes[0]), ref)
    far = int(np.argmax(ref))
    assert wh.d1(dec, cubes[0], cubes[far]) == ref[far]
    assert wh.d1(dec, cubes[0], cubes[0]) == 0


def test_mask_mode_and_disconnected_components():
    m = np.zeros((8, 24), dtype=bool)
    m[1:7, 1:7] = True
    m[1:7, 17:23] = True
    dec = wh.whitney_decompose(m, max_level=7)  # forced down to cell level
    assert dec.max_level == 0
    assert dec.certificate.all_ok
    left = [c for c in dec.cubes if c.center[1] < 8]
    right = [c for c in dec.cubes if c.center[1] > 16]
    assert left and right and len(left) + len(right) == dec.n_cubes
    with pytest.raises(ValueError):
        wh.d1(dec, left[0], right[0])
    # the blobs are translates of each other
    assert {(c.level, c.index[0], c.index[1] + 16) for c in left} \
        == {(c.level, c.index[0], c.index[1]) for c in right}


def test_single_cell_mask():
    dec = wh.whitney_decompose(np.ones((3, 3), dtype=bool), max_level=0)
    assert dec.n_cubes == 1
    assert dec.cubes[0] == wh.DyadicCube(0, (1, 1))
    with pytest.raises(ValueError):
        wh.estimate_uniform_constant(dec)


def test_complement_mode_avoids_closure():
    shape = shape_from_spec(DISK)
    dec = wh.whitney_decompose(shape, max_level=5, complement=True)
    assert dec.certificate.all_ok
    assert dec.window is not None
    assert all(shape.box_to_closure(c.lo, c.hi) > 0 for c in dec.cubes)


def test_uniform_constant_estimate():
    dec = _disk_dec()
    est = wh.estimate_uniform_constant(dec, pair_budget=300, n_deep=8)
    assert est["n_cubes"] == dec.n_cubes
    assert est["n_pairs"] <= 300
    assert est["n_disconnected"] == 0
    assert np.isfinite(est["K"]) and est["K"] > 0
    assert est["K_shifted"] <= est["K"] * (1.0 + est["floor"])
    w = est["witness"]
    a = wh.DyadicCube(w["a"]["level"], tuple(w["a"]["index"]))
    b = wh.DyadicCube(w["b"]["level"], tuple(w["b"]["index"]))
    # witness pair reproduces the reported ratio
    assert wh.d1(dec, a, b) == w["d1"]
    assert wh.d2(dec, a, b) == pytest.approx(w["d2"], rel=1e-15)
    assert w["d1"] / max(w["d2"], est["floor"]) == pytest.approx(est["K"])
    # deterministic under a fixed seed
    again = wh.estimate_uniform_constant(dec, pair_budget=300, n_deep=8)
    assert again["K"] == est["K"]
