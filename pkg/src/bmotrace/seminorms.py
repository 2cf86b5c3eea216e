"""Oscillation and boundary-growth seminorms on rasterized domains.

Every engine here follows one canonical evaluation contract, shared
verbatim with the brute-force oracle so the two agree bit for bit:

  * candidate balls are lattice centers crossed with the geometric
    radius ladder (ratio sqrt(2), from 2h, capped by the bound);
  * ball membership runs in half-cell integer units (see ballgeom);
  * sums accumulate sequentially over cells in row-major order;
  * values come from fixed formulas: mean oscillation = osc_sum/count,
    boundary growth = masked_sum / r2_cells**(n/2) (spacing-free),
    uniformly-local L1 = masked_sum * h**n;
  * the sup scan walks radii in ascending order, centers in storage
    order, and replaces the best value only on strict improvement;
  * a sup of exactly 0 reports witness None.

Containment tests are integer comparisons (cr2 > r2_cells), so there is
no floating-point fuzz in which balls are admissible.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import engine
from .ballgeom import ladder_q, radius_ladder
from .grids import GridDomain, tubular_neighborhood

__all__ = [
    "SeminormParams", "SeminormReport", "NormBreakdown",
    "bmo_seminorm", "b_seminorm", "l1_ul", "tube_l1", "lp_ul",
    "bmo_b_norm", "bmo_tube_norm", "vbmo_norm", "miyachi_norm",
    "normal_part", "equivalence_experiment", "fully_curved_experiment",
    "sphere_sample",
]


@dataclass
class SeminormParams:
    """Bounds for the composite norms; all positive, inf allowed."""

    mu: float = np.inf
    nu: float = np.inf
    delta: float = np.inf
    r0: float = 1.0

    def __post_init__(self):
        for name in ("mu", "nu", "delta", "r0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    def ladder(self, h: float, bound: float, cap: float) -> np.ndarray:
        return radius_ladder(h, bound, cap)


@dataclass
class SeminormReport:
    kind: str
    value: float
    witness: dict | None
    balls_checked: int
    params: dict
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value, "witness": self.witness,
                "balls_checked": self.balls_checked, "params": self.params,
                "flags": list(self.flags)}


@dataclass
class NormBreakdown:
    """Composite norm: total value plus its named parts."""

    kind: str
    value: float
    parts: dict
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value": self.value,
                "parts": {k: (v.to_dict() if hasattr(v, "to_dict") else v)
                          for k, v in self.parts.items()},
                "flags": list(self.flags)}


class _SupScan:
    """Strict-improvement max tracker over (radius asc, center asc)."""

    def __init__(self):
        self.value = 0.0
        self.witness = None
        self.checked = 0

    def feed(self, values: np.ndarray, make_witness):
        self.checked += int(values.size)
        if values.size == 0:
            return
        i = int(np.argmax(values))
        v = float(values[i])
        if v > self.value:
            self.value = v
            self.witness = make_witness(i)

    def finish(self):
        if self.value == 0.0:
            self.witness = None


def _as_flat(f: np.ndarray, dom: GridDomain) -> np.ndarray:
    a = np.asarray(f, dtype=np.float64)
    if a.shape != dom.grid.shape:
        raise ValueError("field shape does not match grid")
    return np.ascontiguousarray(a).reshape(-1)


def bmo_seminorm(f: np.ndarray, dom: GridDomain, mu: float = np.inf,
                 mask: np.ndarray | None = None) -> SeminormReport:
    """Sup of mean oscillation over balls inside the mask, radius < mu.

    mask defaults to the domain occupancy; pass a full-grid mask (e.g.
    np.ones) to measure an extended field over the whole lattice.
    """
    g = dom.grid
    fv = _as_flat(f, dom)
    if mask is None:
        m = dom.mask
        cr2 = dom.cr2
    else:
        m = np.ascontiguousarray(mask, dtype=bool)
        padded = np.pad(m, 1, constant_values=False)
        idx = ndimage.distance_transform_edt(padded, return_distances=False,
                                             return_indices=True)
        pos = np.indices(padded.shape)
        cr2 = ((idx.astype(np.int64) - pos) ** 2).sum(axis=0)[
            tuple(slice(1, -1) for _ in range(g.dim))]
    cr2_flat = cr2.reshape(-1)
    ladder = radius_ladder(g.h, mu, g.diameter)
    scan = _SupScan()
    for r2 in ladder:
        centers = np.flatnonzero(m.reshape(-1) & (cr2_flat > r2)).astype(np.int64)
        if centers.size == 0:
            continue
        tab = dom.balls.table(ladder_q(int(r2)))
        sums = engine.osc_sums(fv, centers, tab)
        vals = sums / tab.count

        def wit(i, r2=r2, centers=centers):
            c = g.world(g.coords_of(np.array([centers[i]]))[0])
            return {"center": [float(x) for x in c],
                    "radius": g.h * float(np.sqrt(r2)), "r2_cells": int(r2)}
        scan.feed(vals, wit)
    scan.finish()
    flags = []
    if scan.checked == 0:
        flags.append("empty_sup")
    return SeminormReport("bmo", scan.value, scan.witness, scan.checked,
                          {"mu": float(mu), "h": g.h, "domain": dom.name}, flags)


def b_seminorm(f: np.ndarray, dom: GridDomain, nu: float = np.inf,
               component: int | None = None) -> SeminormReport:
    """Boundary-growth sup: r^-n * integral of |f| over occupied cells
    of balls centered at interface midpoints, radius < nu."""
    g = dom.grid
    fv = _as_flat(f, dom)
    bnd = dom.boundary
    if bnd.count == 0:
        raise ValueError("domain has an empty interface")
    mask_u8 = np.ascontiguousarray(dom.mask, dtype=np.uint8).reshape(-1)
    ladder = radius_ladder(g.h, nu, g.diameter)
    nd = g.dim
    scan = _SupScan()
    for r2 in ladder:
        q = ladder_q(int(r2))
        denom = float(r2) ** (nd / 2.0)
        for (axis, sign), sl in bnd.group_slices.items():
            idx = np.arange(sl.start, sl.stop)
            if component is not None:
                idx = idx[bnd.components[idx] == component]
            if idx.size == 0:
                continue
            shift = tuple(sign if k == axis else 0 for k in range(nd))
            tab = dom.balls.table(q, shift)
            anchors = np.ascontiguousarray(bnd.anchors[idx])
            sums = engine.masked_abs_sums(fv, mask_u8, anchors, tab)
            vals = sums / denom

            def wit(i, r2=r2, idx=idx):
                j = int(idx[i])
                return {"center": [float(x) for x in bnd.positions[j]],
                        "radius": g.h * float(np.sqrt(r2)), "r2_cells": int(r2),
                        "face": j, "component": int(bnd.components[j])}
            scan.feed(vals, wit)
    scan.finish()
    flags = [] if scan.checked else ["empty_sup"]
    return SeminormReport("b", scan.value, scan.witness, scan.checked,
                          {"nu": float(nu), "h": g.h, "domain": dom.name,
                           "component": component}, flags)


def _region_reach_prune(region: np.ndarray, r_cells_sq: float) -> np.ndarray:
    """Flat indices of cells whose r-ball can touch the region."""
    if region.all():
        return np.arange(region.size, dtype=np.int64)
    idx = ndimage.distance_transform_edt(~region, return_distances=False,
                                         return_indices=True)
    pos = np.indices(region.shape)
    d2 = ((idx.astype(np.int64) - pos) ** 2).sum(axis=0)
    return np.flatnonzero(d2.reshape(-1) <= r_cells_sq).astype(np.int64)


def l1_ul(f: np.ndarray, dom: GridDomain, region: np.ndarray,
          r0: float = 1.0) -> SeminormReport:
    """Uniformly-local L1: sup over all lattice centers of the |f| mass
    in the r0-ball intersected with the region mask."""
    return lp_ul(f, dom, region, p=1, r0=r0)


def lp_ul(f: np.ndarray, dom: GridDomain, region: np.ndarray,
          p: int = 1, r0: float = 1.0) -> SeminormReport:
    """sup over centers of (integral over B_r0 cap region of |f|^p)^(1/p).

    Centers range over the full lattice; centers whose ball cannot meet
    the region are skipped (their integral is 0 and cannot attain a
    positive sup)."""
    g = dom.grid
    if r0 <= 0:
        raise ValueError("r0 must be positive")
    reg = np.ascontiguousarray(region, dtype=bool)
    if reg.shape != g.shape:
        raise ValueError("region shape does not match grid")
    if not reg.any():
        raise ValueError("region is empty")
    fv = _as_flat(f, dom)
    if p != 1:
        fv = np.abs(fv) ** p
    reg_u8 = reg.astype(np.uint8).reshape(-1)
    rc2 = (r0 / g.h) ** 2
    q = 4.0 * rc2
    tab = dom.balls.table(q)
    keep = _region_reach_prune(reg, rc2)
    nd = g.dim
    scan = _SupScan()
    chunk = 1 << 14
    coords_all = g.coords_of(keep)
    for s in range(0, keep.size, chunk):
        anchors = np.ascontiguousarray(coords_all[s:s + chunk])
        sums = engine.masked_abs_sums(fv, reg_u8, anchors, tab)
        vals = sums * g.h ** nd

        def wit(i, s=s):
            c = g.world(coords_all[s + i])
            return {"center": [float(x) for x in c], "radius": float(r0)}
        scan.feed(vals, wit)
    scan.finish()
    value = scan.value if p == 1 else scan.value ** (1.0 / p)
    return SeminormReport("l1_ul" if p == 1 else f"l{p}_ul", value,
                          scan.witness, scan.checked,
                          {"r0": float(r0), "p": p, "h": g.h, "domain": dom.name})


def tube_l1(f: np.ndarray, dom: GridDomain, delta: float,
            r0: float = 1.0) -> SeminormReport:
    """L1_ul over the boundary tube of width delta."""
    region = tubular_neighborhood(dom, delta)
    rep = l1_ul(f, dom, region, r0)
    rep.kind = "tube_l1"
    rep.params["delta"] = float(delta)
    return rep


def bmo_b_norm(f: np.ndarray, dom: GridDomain, mu: float,
               nu: float) -> NormBreakdown:
    """Oscillation plus boundary-growth norm."""
    a = bmo_seminorm(f, dom, mu)
    b = b_seminorm(f, dom, nu)
    return NormBreakdown("bmo_b", a.value + b.value, {"bmo": a, "b": b},
                         a.flags + b.flags)


def bmo_tube_norm(f: np.ndarray, dom: GridDomain, mu: float, delta: float,
                  r0: float = 1.0) -> NormBreakdown:
    """Oscillation norm plus uniformly-local integrability on the tube."""
    a = bmo_seminorm(f, dom, mu)
    t = tube_l1(f, dom, delta, r0)
    return NormBreakdown("bmo_tube", a.value + t.value, {"bmo": a, "tube_l1": t},
                         a.flags + t.flags)


def normal_part(v: np.ndarray, dom: GridDomain,
                grad_source: str = "auto") -> tuple[np.ndarray, list]:
    """Scalar field grad(d) . v on occupied cells (0 elsewhere).

    grad_source: "analytic" uses the exact inward distance gradient from
    the attached shape, "discrete" the finite-difference gradient on its
    reliable cells, "auto" prefers analytic when a shape is attached.
    """
    g = dom.grid
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (g.dim,) + g.shape:
        raise ValueError("vector field must have shape (dim, *grid)")
    flags = []
    if grad_source == "auto":
        grad_source = "analytic" if dom.shape is not None else "discrete"
    if grad_source == "analytic":
        if dom.shape is None:
            raise ValueError("no analytic shape attached")
        grad = dom.grad_field
    elif grad_source == "discrete":
        grad = dom.dist.grad
        if not dom.dist.reliable[dom.mask].all():
            flags.append("unreliable_cells_excluded")
            grad = np.where(dom.dist.reliable[None], grad, np.nan)
    else:
        raise ValueError(f"unknown grad_source {grad_source!r}")
    w = (grad * v).sum(axis=0)
    w = np.where(dom.mask, w, 0.0)
    bad = ~np.isfinite(w)
    if bad.any():
        if "unreliable_cells_excluded" not in flags:
            flags.append("unreliable_cells_excluded")
        w = np.where(bad, 0.0, w)
    return w, flags


def vbmo_norm(v: np.ndarray, dom: GridDomain,
              params: SeminormParams | None = None,
              grad_source: str = "auto") -> NormBreakdown:
    """Vector norm: per-component oscillation + tube integrability,
    plus boundary growth of the normal part grad(d) . v."""
    params = params or SeminormParams()
    g = dom.grid
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (g.dim,) + g.shape:
        raise ValueError("vector field must have shape (dim, *grid)")
    parts: dict = {}
    flags: list = []
    total = 0.0
    for k in range(g.dim):
        a = bmo_seminorm(v[k], dom, params.mu)
        t = tube_l1(v[k], dom, params.delta, params.r0)
        parts[f"bmo[{k}]"] = a
        parts[f"tube_l1[{k}]"] = t
        total += a.value + t.value
        flags += a.flags + t.flags
    if np.isfinite(params.delta) and params.delta > dom.dist.reach_estimate:
        flags.append("delta_exceeds_reach")
    w, nflags = normal_part(v, dom, grad_source)
    flags += nflags
    nb = b_seminorm(w, dom, params.nu)
    parts["b_normal"] = nb
    total += nb.value
    return NormBreakdown("vbmo", total, parts, flags)


def miyachi_norm(f: np.ndarray, dom: GridDomain,
                 cap: float = np.inf) -> NormBreakdown:
    """Whole-space-flavored norm: oscillation over balls whose double
    stays inside, plus mean |f| over balls whose double stays inside
    while the 5x ball leaks out."""
    g = dom.grid
    fv = _as_flat(f, dom)
    mflat = dom.mask_flat
    cr2_flat = dom.cr2.reshape(-1)
    ladder = radius_ladder(g.h, cap, g.diameter)
    osc_scan = _SupScan()
    b_scan = _SupScan()
    for r2 in ladder:
        inner2 = mflat & (cr2_flat > 4 * r2)
        tab = None
        centers = np.flatnonzero(inner2).astype(np.int64)
        if centers.size:
            tab = dom.balls.table(ladder_q(int(r2)))
            sums = engine.osc_sums(fv, centers, tab)
            vals = sums / tab.count

            def wit(i, r2=r2, centers=centers):
                c = g.world(g.coords_of(np.array([centers[i]]))[0])
                return {"center": [float(x) for x in c],
                        "radius": g.h * float(np.sqrt(r2)), "r2_cells": int(r2)}
            osc_scan.feed(vals, wit)
        bcenters = np.flatnonzero(inner2 & (cr2_flat <= 25 * r2)).astype(np.int64)
        if bcenters.size:
            tab = tab if tab is not None else dom.balls.table(ladder_q(int(r2)))
            sums = engine.abs_sums(fv, bcenters, tab)
            vals = sums / tab.count

            def witb(i, r2=r2, bcenters=bcenters):
                c = g.world(g.coords_of(np.array([bcenters[i]]))[0])
                return {"center": [float(x) for x in c],
                        "radius": g.h * float(np.sqrt(r2)), "r2_cells": int(r2)}
            b_scan.feed(vals, witb)
    osc_scan.finish()
    b_scan.finish()
    flags = [] if (osc_scan.checked or b_scan.checked) else ["empty_sup"]
    osc = SeminormReport("miyachi_osc", osc_scan.value, osc_scan.witness,
                         osc_scan.checked, {"h": g.h, "domain": dom.name}, flags)
    bb = SeminormReport("miyachi_b", b_scan.value, b_scan.witness,
                        b_scan.checked, {"h": g.h, "domain": dom.name})
    return NormBreakdown("miyachi", osc.value + bb.value,
                         {"osc": osc, "b": bb}, flags)


# -- experiments ---------------------------------------------------------


def equivalence_experiment(dom: GridDomain, f: np.ndarray | None = None,
                           v: np.ndarray | None = None,
                           mu_pair: tuple | None = None,
                           delta_pair: tuple | None = None,
                           nu_pair: tuple | None = None,
                           mu: float = np.inf, delta: float = np.inf,
                           r0: float = 1.0, eps: float = 1e-12,
                           grad_source: str = "auto") -> dict:
    """Empirical constants for the exponent-equivalence inequalities.

    mu_pair=(mu1, mu2): ratio of oscillation seminorms at two radius
    bounds (finite for the same function class).
    delta_pair=(d1, d2): tube-L1 at the wide tube against oscillation
    plus tube-L1 at the narrow tube.
    nu_pair=(nu1, nu2) with v: boundary growth of the normal part at the
    wide bound against the narrow bound plus the tube mass of v, with
    the predicted coefficient 1/nu1^n + 1 reported alongside.
    """
    out: dict = {"domain": dom.name, "h": dom.h}
    if mu_pair is not None:
        mu1, mu2 = mu_pair
        if not mu1 <= mu2:
            raise ValueError("need mu1 <= mu2")
        a1 = bmo_seminorm(f, dom, mu1)
        a2 = bmo_seminorm(f, dom, mu2)
        out["experiment"] = "bmo_radii"
        out["lhs"] = a2.value
        out["rhs"] = a1.value
        out["monotone_ok"] = a1.value <= a2.value
        out["ratio"] = a2.value / (a1.value + eps)
    elif delta_pair is not None:
        d1, d2 = delta_pair
        if not d1 <= d2:
            raise ValueError("need delta1 <= delta2")
        t2 = tube_l1(f, dom, d2, r0)
        t1 = tube_l1(f, dom, d1, r0)
        a = bmo_seminorm(f, dom, mu)
        out["experiment"] = "tube_widths"
        out["lhs"] = t2.value
        out["rhs_bmo"] = a.value
        out["rhs_tube"] = t1.value
        out["monotone_ok"] = t1.value <= t2.value
        out["constant"] = t2.value / (a.value + t1.value + eps)
    elif nu_pair is not None:
        nu1, nu2 = nu_pair
        if not nu1 <= nu2 <= delta:
            raise ValueError("need nu1 <= nu2 <= delta")
        w, wflags = normal_part(v, dom, grad_source)
        b2 = b_seminorm(w, dom, nu2)
        b1 = b_seminorm(w, dom, nu1)
        tubes = [tube_l1(np.asarray(v)[k], dom, delta, r0).value
                 for k in range(dom.dim)]
        tube = float(np.sum(tubes))
        out["experiment"] = "b_radii"
        out["lhs"] = b2.value
        out["rhs_b"] = b1.value
        out["rhs_tube"] = tube
        out["monotone_ok"] = b1.value <= b2.value
        out["constant"] = max(0.0, b2.value - b1.value) / (tube + eps)
        out["predicted_coefficient"] = 1.0 / nu1 ** dom.dim + 1.0
        out["flags"] = wflags
    else:
        raise ValueError("pass one of mu_pair, delta_pair, nu_pair")
    return out


def sphere_sample(dim: int, n: int) -> np.ndarray:
    """Deterministic unit directions: uniform angles in 2d, a Fibonacci
    lattice in 3d, seeded Gaussian normalization above."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        th = 2 * np.pi * np.arange(n) / n
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    if dim == 3:
        k = np.arange(n) + 0.5
        phi = np.arccos(1 - 2 * k / n)
        th = np.pi * (1 + np.sqrt(5.0)) * k
        return np.stack([np.sin(phi) * np.cos(th), np.sin(phi) * np.sin(th),
                         np.cos(phi)], axis=1)
    rng = np.random.default_rng(0x5EED)
    u = rng.normal(size=(n, dim))
    return u / np.sqrt((u * u).sum(axis=1, keepdims=True))


def fully_curved_experiment(dom: GridDomain, nu: float, n_dirs: int = 64,
                            grad_source: str = "auto") -> dict:
    """Minimum over unit directions c of the boundary growth of
    grad(d) . c, reported per boundary component.

    Flat components admit tangential c with value 0; components whose
    normals span all directions keep the minimum away from 0.
    """
    g = dom.grid
    dirs = sphere_sample(g.dim, n_dirs)
    n_comp = dom.boundary.n_components
    values = np.empty((dirs.shape[0], n_comp))
    for i, c in enumerate(dirs):
        vfield = np.broadcast_to(c.reshape((g.dim,) + (1,) * g.dim),
                                 (g.dim,) + g.shape).copy()
        w, _ = normal_part(vfield, dom, grad_source)
        for j in range(n_comp):
            values[i, j] = b_seminorm(w, dom, nu, component=j).value
    per_comp = values.min(axis=0)
    argmins = values.argmin(axis=0)
    return {
        "domain": dom.name, "h": g.h, "nu": float(nu),
        "n_directions": int(dirs.shape[0]),
        "per_component_min": [float(x) for x in per_comp],
        "min_value": float(per_comp.min()) if n_comp else 0.0,
        "witness_directions": [[float(x) for x in dirs[a]] for a in argmins],
    }
