"""Normal traces, the divergence identity, and the log counterexample."""

import math

import numpy as np
import pytest

import bmotrace.seminorms as sn
import bmotrace.trace as tr
from bmotrace.grids import build_domain

SQUARE = {"type": "square", "params": {"side": 1.0}}


def _rho_pair():
    rho = lambda p: np.exp(p[:, 0]) * (1 + 0.3 * p[:, 1])
    grad = lambda p: np.stack([np.exp(p[:, 0]) * (1 + 0.3 * p[:, 1]),
                               np.exp(p[:, 0]) * 0.3], axis=-1)
    return rho, grad


def test_trace_of_dyadic_constant_is_exact(strip32):
    c = (0.75, -0.5)
    v = [np.full(strip32.grid.shape, c[0]), np.full(strip32.grid.shape, c[1])]
    out = tr.normal_trace(v, strip32)
    bm = strip32.boundary
    # depth-2 extrapolation of a constant reproduces it bit for bit
    assert np.array_equal(out, bm.normals[:, 0] * c[0] + bm.normals[:, 1] * c[1])


def test_trace_of_linear_field_hits_face_midpoints(disk64):
    pts = disk64.grid.centers().reshape(disk64.grid.shape + (2,))
    v = [pts[..., 0], pts[..., 1]]
    out = tr.normal_trace(v, disk64)
    bm = disk64.boundary
    want = (bm.positions * bm.normals).sum(axis=1)
    np.testing.assert_allclose(out, want, atol=1e-12)


def test_trace_needs_two_interior_cells():
    import bmotrace.grids as gr
    m = np.zeros((12, 12), dtype=bool)
    m[5, 2:10] = True  # one cell thick
    dom = gr.GridDomain.from_mask(gr.Grid((12, 12), 1 / 8, (0.0, 0.0)), m)
    with pytest.raises(ValueError):
        tr.normal_trace([np.zeros((12, 12))] * 2, dom)


def test_divergence_of_linear_fields(disk32):
    pts = disk32.grid.centers().reshape(disk32.grid.shape + (2,))
    x, y = pts[..., 0], pts[..., 1]
    rot = tr.discrete_divergence([y, -x], disk32)
    assert np.all(rot == 0.0)
    expand = tr.discrete_divergence([x, y], disk32)
    np.testing.assert_allclose(expand, 2.0, atol=1e-10)


@pytest.mark.parametrize("kind", ["stream-function", "gradient-of-harmonic"])
def test_ibp_residual_second_order_on_square(kind):
    rho, grad = _rho_pair()
    hs = [2.0 ** -k for k in range(3, 8)]
    res = []
    for h in hs:
        dom = build_domain(SQUARE, h)
        f = tr.make_test_field(tr.TestFieldSpec(kind, seed=2), dom)
        res.append(tr.ibp_residual(f.components, rho, grad, dom)["residual"])
    lg, lr = np.log(hs), np.log(res)
    slope, b = np.polyfit(lg, lr, 1)
    pred = slope * lg + b
    r2 = 1 - ((lr - pred) ** 2).sum() / ((lr - lr.mean()) ** 2).sum()
    assert slope > 1.5
    assert r2 > 0.99


def test_ibp_on_staircase_boundary_still_decays():
    rho, grad = _rho_pair()
    res = []
    for h in (1 / 8, 1 / 64):
        dom = build_domain({"type": "disk"}, h)
        f = tr.make_test_field(tr.TestFieldSpec("stream-function", seed=2), dom)
        res.append(tr.ibp_residual(f.components, rho, grad, dom)["residual"])
    assert res[1] < 0.2 * res[0]


def test_ibp_open_walls_leak_flux(strip32):
    """The strip mesh carries only the true bottom boundary, so the
    divergence identity misses the wall flux by design: for v = (x, 0)
    the residual equals the domain area exactly."""
    rho1 = lambda p: np.ones(p.shape[0])
    grad0 = lambda p: np.zeros_like(p)
    x = strip32.grid.centers()[:, 0].reshape(strip32.grid.shape)
    out = tr.ibp_residual([x, np.zeros_like(x)], rho1, grad0, strip32)
    assert out["trace_term"] == 0.0
    assert out["residual"] == 2.0


def test_field_kinds_and_validation(disk32):
    for kind, free in (("stream-function", True),
                       ("gradient-of-harmonic", True),
                       ("random-smooth", False)):
        f = tr.make_test_field(tr.TestFieldSpec(kind, seed=3), disk32)
        assert f.divergence_free is free
        assert len(f.components) == 2
    with pytest.raises(ValueError):
        tr.TestFieldSpec("vortex-sheet")
    # default cell phase puts samples on the diagonal of the log field
    sq = build_domain(SQUARE, 1 / 16)
    with pytest.raises(ValueError):
        tr.make_test_field(tr.TestFieldSpec("counterexample-log"), sq)


def test_harmonic_gradient_divergence_shrinks_second_order():
    # analytically divergence free; the discrete operator leaves only
    # its own O(h^2) truncation error
    worst = []
    for h in (1 / 32, 1 / 64):
        dom = build_domain({"type": "disk"}, h)
        f = tr.make_test_field(tr.TestFieldSpec("gradient-of-harmonic",
                                                seed=4), dom)
        div = tr.discrete_divergence(f.components, dom)
        worst.append(np.abs(div[1:-1, 1:-1]).max())
    assert worst[1] < 0.3 * worst[0]


def test_trace_experiment_modes(disk32):
    family = [tr.TestFieldSpec("stream-function", seed=k) for k in range(3)]
    params = sn.SeminormParams(mu=0.25, nu=0.2, delta=0.2, r0=0.25)
    for mode in ("NTH", "NTG", "TRBB"):
        out = tr.trace_inequality_experiment(family, disk32, params, mode)
        s = out["summary"]
        assert s["mode"] == mode and s["n_fields"] == 3
        assert s["n_excluded"] == 0
        assert math.isfinite(s["max_ratio"]) and s["max_ratio"] > 0
        for rep in out["reports"]:
            assert rep.sup_trace >= 0
            assert "div_lnul" in rep.norm_bundle
    with pytest.raises(ValueError):
        tr.trace_inequality_experiment(family, disk32, params, mode="NTX")


def test_trace_experiment_excludes_degenerate_fields(disk32):
    family = [tr.TestFieldSpec("random-smooth", seed=1, amplitude=0.0)]
    params = sn.SeminormParams(mu=0.25, nu=0.2, delta=0.2, r0=0.25)
    out = tr.trace_inequality_experiment(family, disk32, params, "TRBB")
    assert out["summary"]["n_excluded"] == 1
    assert math.isnan(out["reports"][0].ratio)
    assert "norm_degenerate" in out["reports"][0].flags


def test_counterexample_growth_and_exact_zero_divergence():
    rep = tr.counterexample_report(levels=(1 / 16, 1 / 32, 1 / 64))
    for row in rep["rows"]:
        assert row["max_interior_div"] == 0.0  # symmetric float cancellation
    assert rep["trace_fit"]["slope"] == pytest.approx(1.0, abs=1e-9)
    assert rep["trace_fit"]["r_squared"] > 0.999
    assert rep["b_normal_fit"]["slope"] > 0.5
    assert rep["bmo_spread"] < 1.10
    traces = [r["sup_trace"] for r in rep["rows"]]
    assert all(b > a for a, b in zip(traces, traces[1:]))
