"""Deterministic I/O: canonical JSON, binary field dumps with
checksums, CSV tables, and the SVG renderers."""

import json
import math

import numpy as np
import pytest

from bmotrace import storage as st
from bmotrace.grids import Grid, GridDomain
from bmotrace.seminorms import bmo_seminorm
from bmotrace.shapes import Ball, Box
from bmotrace.whitney import whitney_decompose


def test_fmt_float_round_trips_doubles():
    vals = [0.1, 1.0 / 3.0, 2.0 / math.e, 1e-300, -1.7e308, 6.02e23,
            5.0, 0.0, 2.0 ** -52]
    for v in vals:
        assert float(st.fmt_float(v)) == v
    assert st.fmt_float(float("nan")) == "NaN"
    assert st.fmt_float(float("inf")) == "Infinity"
    assert st.fmt_float(float("-inf")) == "-Infinity"


def test_canonical_json_is_order_independent():
    a = {"b": 1, "a": [1.5, {"z": None, "y": True}], "c": 0.1}
    b = {"c": 0.1, "a": [1.5, {"y": True, "z": None}], "b": 1}
    sa, sb = st.dumps_canonical(a), st.dumps_canonical(b)
    assert sa == sb
    # keys come out sorted, floats at full precision
    assert sa.index('"a"') < sa.index('"b"') < sa.index('"c"')
    assert "0.10000000000000001" in sa
    assert sa.endswith("\n")


def test_canonical_json_handles_numpy_and_specials():
    obj = {"i": np.int64(7), "f": np.float64(0.1), "b": np.bool_(True),
           "arr": np.arange(3), "nan": float("nan"), "none": None,
           "empty_d": {}, "empty_l": []}
    s = st.dumps_canonical(obj)
    back = json.loads(s)
    assert back["i"] == 7
    assert back["f"] == 0.1
    assert back["b"] is True
    assert back["arr"] == [0, 1, 2]
    assert math.isnan(back["nan"])
    assert back["none"] is None
    assert back["empty_d"] == {} and back["empty_l"] == []


def test_canonical_json_rejects_unknown_types():
    with pytest.raises(TypeError, match="cannot serialize"):
        st.dumps_canonical({"x": object()})


def test_save_json_is_byte_stable(tmp_path):
    obj = {"result": 0.1 + 0.2, "tags": ["x", "y"], "n": 12}
    p1 = st.save_json(tmp_path / "a.json", obj)
    p2 = st.save_json(tmp_path / "b.json", dict(reversed(list(obj.items()))))
    assert p1.read_bytes() == p2.read_bytes()
    assert st.load_json(p1) == obj


def test_field_round_trip_is_bitwise(tmp_path):
    g = Grid((4, 3), 0.25, (0.0, 0.0))
    f = np.linspace(-1.0, 1.0, 12).reshape(4, 3) * math.pi
    hpath, dpath = st.save_field(tmp_path / "f", f, g)
    assert hpath.suffix == ".json" and dpath.suffix == ".bin"
    arr, hdr = st.load_field(tmp_path / "f")
    assert np.array_equal(arr, f)
    assert hdr["shape"] == [4, 3]
    assert hdr["spacing"] == g.h
    assert hdr["origin"] == [0.0, 0.0]
    assert hdr["dtype"] == "<f8"


def test_field_shape_mismatch_rejected(tmp_path):
    g = Grid((4, 3), 0.25, (0.0, 0.0))
    with pytest.raises(ValueError, match="shape"):
        st.save_field(tmp_path / "bad", np.zeros((2, 2)), g)


def test_field_checksum_catches_corruption(tmp_path):
    g = Grid((4, 3), 0.25, (0.0, 0.0))
    _, dpath = st.save_field(tmp_path / "f", np.ones((4, 3)), g)
    raw = bytearray(dpath.read_bytes())
    raw[5] ^= 0xFF
    dpath.write_bytes(bytes(raw))
    with pytest.raises(ValueError, match="checksum"):
        st.load_field(tmp_path / "f")


def test_mask_round_trip(tmp_path):
    g = Grid((6, 5), 0.5, (-1.0, -1.0))
    m = np.zeros((6, 5), dtype=bool)
    m[1:4, 2:4] = True
    st.save_mask(tmp_path / "m", m, g)
    m2, hdr = st.load_mask(tmp_path / "m")
    assert m2.dtype == bool
    assert np.array_equal(m2, m)
    assert hdr["dtype"] == "u1"


def test_write_csv_exact_text(tmp_path):
    p = st.write_csv(tmp_path / "t.csv", ["name", "value"],
                     [["lo", 0.1], ["hi", float("nan")], [3, "s"]])
    assert p.read_text() == ("name,value\n"
                             "lo,0.10000000000000001\n"
                             "hi,NaN\n"
                             "3,s\n")


def test_whitney_svg_one_rect_per_cube(tmp_path):
    dec = whitney_decompose(Ball((0.0, 0.0), 1.0), max_level=4)
    p = st.whitney_svg(dec, tmp_path / "w.svg")
    txt = p.read_text()
    assert txt.startswith("<svg") and txt.endswith("</svg>\n")
    assert txt.count("<rect") == len(dec.cubes)
    # repeated render is byte-identical
    q = st.whitney_svg(dec, tmp_path / "w2.svg")
    assert q.read_bytes() == p.read_bytes()


def test_whitney_svg_requires_two_dims(tmp_path):
    dec = whitney_decompose(Box((0.0, 0.0, 0.0), (1.0, 1.0, 1.0)), max_level=4)
    assert dec.cubes
    with pytest.raises(ValueError, match="two-dimensional"):
        st.whitney_svg(dec, tmp_path / "w.svg")


def test_witness_svg_draws_mask_and_ball(tmp_path):
    g = Grid((17, 9), 1.0 / 8.0, (0.0, 0.0))
    m = np.zeros(g.shape, dtype=bool)
    m[:, :5] = True
    dom = GridDomain.from_mask(g, m)
    f = (np.add.outer(np.arange(17), np.arange(9)) % 2).astype(float)
    rep = bmo_seminorm(f, dom)
    assert rep.witness is not None
    p = st.witness_svg(dom, rep, tmp_path / "x.svg")
    txt = p.read_text()
    assert txt.count("<rect") == int(m.sum())
    assert txt.count("<circle") == 1
    assert st.fmt_float(rep.witness["radius"]) in txt


def test_witness_svg_without_witness_omits_ball(tmp_path):
    g = Grid((17, 9), 1.0 / 8.0, (0.0, 0.0))
    m = np.zeros(g.shape, dtype=bool)
    m[:, :5] = True
    dom = GridDomain.from_mask(g, m)
    rep = bmo_seminorm(np.zeros(g.shape), dom)
    assert rep.witness is None
    p = st.witness_svg(dom, rep, tmp_path / "x.svg")
    assert "<circle" not in p.read_text()
