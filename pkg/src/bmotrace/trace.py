"""Normal traces on the boundary, the integration-by-parts check, test
field families, trace-inequality experiments, and the logarithmic field
whose trace blows up while its mean oscillation stays bounded.

The trace at a boundary face midpoint extrapolates the field from the
two interior cells behind the face (depth-2 one-sided stencil, O(h)
consistent) and dots it with the exterior normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import random_scalar_points
from .grids import GridDomain, build_domain, tubular_neighborhood
from . import seminorms as sn

__all__ = [
    "TestFieldSpec", "TestField", "TraceReport", "normal_trace",
    "discrete_divergence", "ibp_residual", "make_test_field",
    "trace_inequality_experiment", "counterexample_report",
]


@dataclass(frozen=True)
class TestFieldSpec:
    kind: str                     # stream-function | gradient-of-harmonic |
                                  # counterexample-log | random-smooth
    seed: int = 0
    n_modes: int = 3
    amplitude: float = 1.0

    def __post_init__(self):
        kinds = {"stream-function", "gradient-of-harmonic",
                 "counterexample-log", "random-smooth"}
        if self.kind not in kinds:
            raise ValueError(f"unknown field kind {self.kind!r}")


@dataclass
class TestField:
    components: list
    spec: TestFieldSpec
    divergence_free: bool


@dataclass
class TraceReport:
    sup_trace: float
    norm_bundle: dict
    ratio: float
    flags: tuple = ()

    def to_dict(self) -> dict:
        return {"sup_trace": self.sup_trace, "norm_bundle": self.norm_bundle,
                "ratio": self.ratio, "flags": list(self.flags)}


def normal_trace(v, dom: GridDomain) -> np.ndarray:
    """Samples of the normal component at boundary face midpoints, in
    the canonical boundary order; exterior-normal convention."""
    bm = dom.boundary
    comps = [np.asarray(c, dtype=np.float64) for c in v]
    nd = dom.grid.dim
    anchors = bm.anchors
    deeper = anchors.copy()
    rows = np.arange(anchors.shape[0])
    deeper[rows, bm.axes] -= bm.signs
    for idx in (anchors, deeper):
        if (idx < 0).any() or (idx >= np.asarray(dom.grid.shape)).any():
            raise ValueError("boundary stencil leaves the grid")
    a0 = tuple(anchors[:, k] for k in range(nd))
    a1 = tuple(deeper[:, k] for k in range(nd))
    if not (dom.mask[a0].all() and dom.mask[a1].all()):
        raise ValueError("domain too thin for the depth-2 trace stencil")
    out = np.zeros(anchors.shape[0])
    for k in range(nd):
        vm = 1.5 * comps[k][a0] - 0.5 * comps[k][a1]
        out += vm * bm.normals[:, k]
    return out


def discrete_divergence(v, dom: GridDomain) -> np.ndarray:
    """Central-difference divergence on the full grid (one-sided at the
    grid edge, which lies in the margin outside the domain)."""
    h = dom.grid.h
    out = np.zeros(dom.grid.shape)
    for k, comp in enumerate(v):
        out += np.gradient(np.asarray(comp, dtype=np.float64), h, axis=k)
    return out


def ibp_residual(v, rho, grad_rho, dom: GridDomain) -> dict:
    """Residual of the divergence identity: boundary flux of rho * v
    minus the two volume terms, all by midpoint quadrature.  rho and
    grad_rho are callables on (N, dim) points so the gradient is exact.
    """
    g = dom.grid
    bm = dom.boundary
    tr = normal_trace(v, dom)
    rho_b = np.asarray(rho(bm.positions), dtype=np.float64)
    trace_term = float(np.cumsum(tr * rho_b * bm.weights)[-1]) \
        if tr.size else 0.0

    pts = g.centers()[dom.mask_flat]
    rho_c = np.asarray(rho(pts), dtype=np.float64)
    grads = np.asarray(grad_rho(pts), dtype=np.float64)
    div = discrete_divergence(v, dom).reshape(-1)[dom.mask_flat]
    cellvol = g.h ** g.dim
    div_term = float(np.cumsum(div * rho_c)[-1]) * cellvol if pts.size else 0.0
    vc = np.stack([np.asarray(c, dtype=np.float64).reshape(-1)[dom.mask_flat]
                   for c in v], axis=-1)
    grad_term = float(np.cumsum((vc * grads).sum(axis=1))[-1]) * cellvol \
        if pts.size else 0.0
    residual = abs(trace_term - div_term - grad_term)
    return {"trace_term": trace_term, "div_term": div_term,
            "grad_term": grad_term, "residual": residual}


def make_test_field(spec: TestFieldSpec, dom: GridDomain) -> TestField:
    g = dom.grid
    nd = g.dim
    pts = g.centers()
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "stream-function":
        if nd != 2:
            raise ValueError("stream-function fields are two-dimensional")
        phi = random_scalar_points(pts, spec.seed, spec.n_modes,
                                   spec.amplitude).reshape(g.shape)
        v1 = np.gradient(phi, g.h, axis=1)
        v2 = -np.gradient(phi, g.h, axis=0)
        return TestField([v1, v2], spec, True)
    if spec.kind == "gradient-of-harmonic":
        if nd != 2:
            raise ValueError("harmonic-gradient fields are two-dimensional")
        z = pts[:, 0] + 1j * pts[:, 1]
        ks = rng.integers(1, 5, size=spec.n_modes)
        cs = rng.uniform(-spec.amplitude, spec.amplitude,
                         size=spec.n_modes) * np.exp(
            1j * rng.uniform(0, 2 * math.pi, size=spec.n_modes))
        # d/dz of sum c z^k gives the conjugate gradient of Re(sum c z^k)
        w = np.zeros(pts.shape[0], dtype=complex)
        for k, c in zip(ks, cs):
            w += c * k * z ** (int(k) - 1)
        return TestField([w.real.reshape(g.shape),
                          (-w.imag).reshape(g.shape)], spec, True)
    if spec.kind == "counterexample-log":
        if nd != 2:
            raise ValueError("the log field is two-dimensional")
        t = pts[:, 0] - pts[:, 1]
        if (t == 0).any() or (np.abs(np.abs(t) - g.h) < 1e-14 * g.h).any():
            raise ValueError("grid phase puts samples on the singular line")
        comp = np.log(np.abs(t)).reshape(g.shape)
        return TestField([comp, comp.copy()], spec, True)
    # random-smooth
    comps = [random_scalar_points(pts, spec.seed * 1009 + k, spec.n_modes,
                                  spec.amplitude).reshape(g.shape)
             for k in range(nd)]
    return TestField(comps, spec, False)


def _div_norm(fieldv, dom: GridDomain, delta: float, r0: float) -> float:
    """Uniformly-local L^n norm of the discrete divergence over the
    boundary tube."""
    div = discrete_divergence(fieldv.components, dom)
    region = tubular_neighborhood(dom, delta)
    rep = sn.lp_ul(div, dom, region, p=dom.grid.dim, r0=r0)
    return rep.value


def trace_inequality_experiment(family, dom: GridDomain,
                                params: sn.SeminormParams,
                                mode: str = "NTH",
                                grad_source: str = "auto") -> dict:
    """Per-field trace-to-norm ratios under one of three norm bundles:
    mode NTH uses the component oscillation norm plus the normal-part
    boundary seminorm, NTG uses the full vector norm with the tube
    term, TRBB uses the oscillation-plus-boundary scalar norm summed
    over components.  The divergence enters through its uniformly-local
    L^n norm over the boundary tube in all modes."""
    if mode not in ("NTH", "NTG", "TRBB"):
        raise ValueError(f"unknown mode {mode!r}")
    reports = []
    ratios = []
    for spec in family:
        fieldv = spec if isinstance(spec, TestField) else \
            make_test_field(spec, dom)
        tr = normal_trace(fieldv.components, dom)
        sup_trace = float(np.abs(tr).max()) if tr.size else 0.0
        flags: tuple = ()
        bundle = {}
        if mode == "NTH":
            bmo_sum = 0.0
            for comp in fieldv.components:
                bmo_sum += sn.bmo_seminorm(comp, dom, mu=params.mu).value
            w, nflags = sn.normal_part(fieldv.components, dom,
                                       grad_source=grad_source)
            bval = sn.b_seminorm(w, dom, nu=params.nu).value
            flags += tuple(nflags)
            bundle["bmo_components"] = bmo_sum
            bundle["b_normal"] = bval
            norm = bmo_sum + bval
        elif mode == "NTG":
            rep = sn.vbmo_norm(fieldv.components, dom, params,
                               grad_source=grad_source)
            flags += tuple(rep.flags)
            bundle["vbmo"] = rep.value
            norm = rep.value
        else:
            norm = 0.0
            for comp in fieldv.components:
                rep = sn.bmo_b_norm(comp, dom, mu=params.mu, nu=params.nu)
                norm += rep.value
            bundle["bmo_b"] = norm
        divn = 0.0 if fieldv.divergence_free else \
            _div_norm(fieldv, dom, params.delta, params.r0)
        bundle["div_lnul"] = divn
        denom = norm + divn
        if not math.isfinite(denom) or denom == 0.0:
            flags += ("norm_degenerate",)
            reports.append(TraceReport(sup_trace, bundle, math.nan, flags))
            continue
        ratio = sup_trace / denom
        ratios.append(ratio)
        reports.append(TraceReport(sup_trace, bundle, ratio, flags))
    summary = {
        "mode": mode,
        "n_fields": len(reports),
        "n_excluded": len(reports) - len(ratios),
        "max_ratio": max(ratios) if ratios else math.nan,
    }
    return {"reports": reports, "summary": summary}


def counterexample_grid(h: float, width: float = 2.0,
                        height: float = 1.0) -> GridDomain:
    """Half-space strip whose cell phases keep every sample of the log
    field off the singular diagonal: integer multiples of h along the
    first axis, half-integer along the second."""
    return build_domain({"type": "halfspace",
                         "params": {"width": width, "height": height}},
                        h, phase=(0.0, 0.5))


def counterexample_report(levels, nu: float = 0.25,
                          width: float = 2.0, height: float = 1.0) -> dict:
    """Refinement table for the log field: the sup of the normal trace
    and the boundary seminorm of the normal part grow like log(1/h)
    while the oscillation seminorm stays level.  Returns the rows plus
    least-squares fits against log(1/h)."""
    rows = []
    for h in levels:
        dom = counterexample_grid(h, width, height)
        fieldv = make_test_field(TestFieldSpec("counterexample-log"), dom)
        tr = normal_trace(fieldv.components, dom)
        sup_trace = float(np.abs(tr).max())
        bmo = sn.bmo_seminorm(fieldv.components[0], dom, mu=math.inf).value
        w, _ = sn.normal_part(fieldv.components, dom, grad_source="auto")
        bval = sn.b_seminorm(w, dom, nu=nu).value
        # exact discrete divergence of the log field is zero: both terms
        # are the same two floats subtracted in opposite order
        div = discrete_divergence(fieldv.components, dom)
        inner = dom.mask.copy()
        inner[[0, -1], :] = False
        inner[:, [0, -1]] = False
        rows.append({"h": h, "sup_trace": sup_trace, "bmo": bmo,
                     "b_normal": bval,
                     "max_interior_div": float(np.abs(div[inner]).max())})
    logs = np.array([math.log(1.0 / r["h"]) for r in rows])

    def _fit(key):
        ys = np.array([r[key] for r in rows])
        slope, intercept = np.polyfit(logs, ys, 1)
        pred = slope * logs + intercept
        ss_res = float(((ys - pred) ** 2).sum())
        ss_tot = float(((ys - ys.mean()) ** 2).sum())
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
        return {"slope": float(slope), "intercept": float(intercept),
                "r_squared": r2}

    bmos = [r["bmo"] for r in rows]
    return {
        "rows": rows,
        "nu": nu,
        "trace_fit": _fit("sup_trace"),
        "b_normal_fit": _fit("b_normal"),
        "bmo_spread": max(bmos) / min(bmos) if min(bmos) > 0 else math.inf,
    }
