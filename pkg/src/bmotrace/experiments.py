"""Named experiment suites shared by the command line and the test
suite.  Every suite returns a JSON-serializable dict with a boolean
"pass" plus the evidence; determinism comes from fixed seeds.
"""

from __future__ import annotations

import math
import time

import numpy as np

from . import charts as ch
from . import extension as ex
from . import fields as fl
from . import seminorms as sn
from . import trace as tr
from . import whitney as wh
from .grids import GridDomain, build_domain

__all__ = ["SUITES", "run_suite", "ze_bound", "ze_failure",
           "jones_stability", "uniformity", "frame_residuals",
           "vfg_check", "counterexample", "trace_stability",
           "equivalences", "fully_curved", "whitney_certify"]


def _full_domain(grid) -> GridDomain:
    """The whole grid as one occupied block: stands in for free space
    around an extended field."""
    return GridDomain.from_mask(grid, np.ones(grid.shape, dtype=bool),
                                name="freespace")


def ze_bound(h: float = 1 / 128, n_fields: int = 50, mu: float = 0.25,
             seed: int = 0x2E0) -> dict:
    """Zero extension of oscillation-plus-boundary bounded fields on the
    disk: the extended oscillation seminorm over the whole grid must
    stay below the volume-ratio constant (8/pi in the plane) plus
    slack, times the domain norm."""
    dom = build_domain({"type": "disk"}, h)
    nd = dom.grid.dim
    omega_n = math.pi if nd == 2 else 4 * math.pi / 3
    bound = max(1.0, 2.0 ** (nd + 1) / omega_n) + 0.5
    rows = []
    worst = 0.0
    for k in range(n_fields):
        f = fl.random_scalar_field(dom.grid, seed=seed + k)
        denom = sn.bmo_b_norm(f, dom, mu=mu, nu=2 * mu).value
        f0 = ex.zero_extend(f, dom, margin=2 * mu)
        free = _full_domain(f0.grid)
        lhs = sn.bmo_seminorm(f0.field, free, mu=mu).value
        ratio = lhs / denom if denom > 0 else math.inf
        worst = max(worst, ratio)
        rows.append({"seed": seed + k, "extended_bmo": lhs,
                     "domain_norm": denom, "ratio": ratio})
    return {"suite": "ze-bound", "h": h, "mu": mu, "bound": bound,
            "max_ratio": worst, "rows": rows, "pass": worst <= bound}


def ze_failure(levels=(1 / 64, 1 / 128, 1 / 256)) -> dict:
    """Zero extension of log(min(x,1)) on the half-line: the extended
    seminorm must blow up like log(1/h), witnessing that boundary decay
    control is necessary."""
    vals = []
    for h in levels:
        dom = build_domain({"type": "interval", "params": {"a": 0.0, "b": 2.0}}, h)
        x = dom.grid.centers()[:, 0]
        safe = np.where(x > 0, np.minimum(x, 1.0), 1.0)
        f = np.log(safe).reshape(dom.grid.shape)
        f = np.where(dom.mask, f, 0.0)
        f0 = ex.zero_extend(f, dom, margin=1.0)
        free = _full_domain(f0.grid)
        vals.append(sn.bmo_seminorm(f0.field, free, mu=math.inf).value)
    logs = np.log(1.0 / np.asarray(levels))
    slope = float(np.polyfit(logs, vals, 1)[0])
    increasing = all(b > a for a, b in zip(vals, vals[1:]))
    return {"suite": "ze-failure", "levels": list(levels), "values": vals,
            "slope": slope, "strictly_increasing": increasing,
            "pass": increasing and slope >= 0.5}


def jones_stability(levels=(1 / 64, 1 / 128), eps: float = 0.25,
                    n_fields: int = 8, seed: int = 0x10E5) -> dict:
    """Extension-to-domain seminorm ratio of the cube-matching
    extension on the disk, compared across spacings."""
    per_level = []
    for h in levels:
        dom = build_domain({"type": "disk"}, h)
        cache: dict = {}
        ratios = []
        for k in range(n_fields):
            f = fl.random_scalar_field(dom.grid, seed=seed + k)
            f = np.where(dom.mask, f, 0.0)
            res = ex.jones_extend(f, dom, eps, **cache)
            cache = {"interior": res.extras["interior"],
                     "exterior": res.extras["exterior"]}
            free = _full_domain(res.grid)
            num = sn.bmo_seminorm(res.field, free, mu=math.inf).value
            den = sn.bmo_seminorm(f, dom, mu=math.inf).value
            ratios.append(num / den)
        per_level.append({"h": h, "max_ratio": max(ratios), "ratios": ratios})
    r0 = per_level[0]["max_ratio"]
    drift = max(abs(lv["max_ratio"] / r0 - 1.0) for lv in per_level)
    return {"suite": "jones-stability", "eps": eps, "levels": per_level,
            "drift": drift, "pass": drift <= 0.25}


_UNIFORMITY_SHAPES = {
    "disk": {"type": "disk"},
    "halfplane": {"type": "box", "params": {"lo": [-1.0, 0.0],
                                            "hi": [1.0, 1.0]}},
    "cusp": {"type": "cusp", "params": {"radius": 0.5}},
}


def uniformity(stable_levels=(5, 6, 7), cusp_levels=(6, 7, 8),
               budget: int = 800, seed: int = 0xD1CE) -> dict:
    """Chain-to-metric constant across refinement depths: level on the
    smooth domains, strictly growing on the cusp."""
    from .shapes import shape_from_spec
    out = {"suite": "uniformity", "domains": {}}
    ok = True
    for name, spec in _UNIFORMITY_SHAPES.items():
        shape = shape_from_spec(spec)
        levels = cusp_levels if name == "cusp" else stable_levels
        ks = []
        for L in levels:
            dec = wh.whitney_decompose(shape, max_level=L)
            est = wh.estimate_uniform_constant(
                dec, pair_budget=budget, seed=seed,
                n_deep=32 if name == "cusp" else 24)
            ks.append(est["K"])
        entry = {"levels": list(levels), "K": ks}
        if name == "cusp":
            entry["strictly_increasing"] = all(b > a for a, b in
                                               zip(ks, ks[1:]))
            ok = ok and entry["strictly_increasing"]
        else:
            mid = sum(ks) / len(ks)
            entry["max_rel_spread"] = max(abs(k / mid - 1.0) for k in ks)
            entry["stable"] = entry["max_rel_spread"] <= 0.20
            ok = ok and entry["stable"]
        out["domains"][name] = entry
    out["pass"] = ok
    return out


def frame_residuals(n_frames: int = 1000, seed: int = 0xF4A3) -> dict:
    """Inverse-last-row identity on synthetic frames and on analytic
    disk frames."""
    per_dim = n_frames // 3
    counts = [per_dim, per_dim, n_frames - 2 * per_dim]
    worst_syn = 0.0
    for dim, cnt in zip((2, 3, 4), counts):
        for a in ch.synthetic_frames(dim, cnt, seed=seed + dim):
            worst_syn = max(worst_syn, ch.inverse_last_row(a)[1])
    disk = build_domain({"type": "disk"}, 1 / 64)
    chart = ch.chart_for(disk.shape, base=0.3, r=0.5, delta=0.4)
    rng = np.random.default_rng(seed)
    ys = np.stack([rng.uniform(-0.45, 0.45, 200),
                   rng.uniform(0.0, 0.35, 200)], axis=1)
    worst_disk = 0.0
    for y in ys:
        fr = ch.frame_matrix(chart, y[None, :])
        worst_disk = max(worst_disk, ch.inverse_last_row(fr.matrix[0])[1])
    return {"suite": "frame-residuals", "n_frames": n_frames,
            "worst_synthetic": worst_syn, "worst_disk": worst_disk,
            "pass": worst_syn < 1e-10 and worst_disk < 1e-8}


def vfg_check(h: float = 1 / 128, n_fields: int = 20,
              seed: int = 0x0F6) -> dict:
    """Chart pullback normal component against the distance-gradient
    product for random smooth fields on the disk."""
    dom = build_domain({"type": "disk"}, h)
    chart = ch.chart_for(dom.shape, base=0.9, r=0.45, delta=0.4)
    devs = []
    for k in range(n_fields):
        v = fl.random_vector_field(dom.grid, seed=seed + k)
        rep = ch.transform_vector_field(v, dom, chart)
        devs.append(rep["max_deviation"])
    worst = max(devs)
    return {"suite": "vfg", "h": h, "n_fields": n_fields,
            "deviations": devs, "worst": worst, "tolerance": 5 * h,
            "pass": worst <= 5 * h}


def counterexample(levels=(1 / 64, 1 / 128, 1 / 256),
                   nu: float = 0.25) -> dict:
    """Log-field dichotomy: level oscillation norm, divergent trace."""
    rep = tr.counterexample_report(list(levels), nu=nu)
    ok = (rep["bmo_spread"] <= 1.10
          and rep["trace_fit"]["r_squared"] > 0.9
          and rep["trace_fit"]["slope"] > 0
          and rep["b_normal_fit"]["r_squared"] > 0.9
          and rep["b_normal_fit"]["slope"] > 0)
    rep["suite"] = "counterexample"
    rep["pass"] = ok
    return rep


def trace_stability(levels=(1 / 32, 1 / 64, 1 / 128), n_fields: int = 20,
                    seed: int = 0x7AC3) -> dict:
    """Trace-to-norm ratios for a divergence-free family in all three
    norm modes across refinements; the flat-boundary mode runs on the
    strip, the curved modes on the disk."""
    t_start = time.time()
    family = [tr.TestFieldSpec("stream-function", seed=seed + k)
              for k in range(n_fields)]
    params = sn.SeminormParams(mu=0.25, nu=0.2, delta=0.2, r0=0.25)
    modes = {"NTH": "halfspace", "NTG": "disk", "TRBB": "disk"}
    out = {"suite": "trace-stability", "levels": list(levels), "modes": {}}
    ok = True
    for mode, domkind in modes.items():
        per_level = []
        for h in levels:
            if domkind == "halfspace":
                dom = build_domain({"type": "halfspace",
                                    "params": {"width": 2.0, "height": 1.0}}, h)
            else:
                dom = build_domain({"type": "disk"}, h)
            res = tr.trace_inequality_experiment(family, dom, params,
                                                 mode=mode)
            per_level.append(res["summary"]["max_ratio"])
        finite = all(math.isfinite(r) for r in per_level)
        mid = sum(per_level) / len(per_level)
        spread = max(abs(r / mid - 1.0) for r in per_level) if finite else math.inf
        entry = {"max_ratio_per_level": per_level, "finite": finite,
                 "max_rel_spread": spread, "stable": finite and spread <= 0.30}
        ok = ok and entry["stable"]
        out["modes"][mode] = entry
    out["runtime_seconds"] = time.time() - t_start
    out["pass"] = ok
    return out


def equivalences(h: float = 1 / 64, n_fields: int = 5,
                 seed: int = 0xE0) -> dict:
    """Parameter-equivalence experiments: oscillation radii, tube
    widths, and boundary-ball radii; each reports the inequality
    direction, exact monotonicity, and the empirical constant."""
    disk = build_domain({"type": "disk"}, h)
    runs = []
    ok = True
    for k in range(n_fields):
        f = fl.random_scalar_field(disk.grid, seed=seed + 2 * k)
        v = fl.random_vector_field(disk.grid, seed=seed + 2 * k + 1)
        trio = [
            sn.equivalence_experiment(disk, f=f, mu_pair=(0.125, 0.25)),
            sn.equivalence_experiment(disk, f=f, delta_pair=(0.1, 0.2),
                                      mu=0.25, r0=0.25),
            sn.equivalence_experiment(disk, v=v, nu_pair=(0.1, 0.2)),
        ]
        for r in trio:
            r["field"] = k
            const = r.get("constant", r.get("ratio"))
            ok = ok and r["monotone_ok"] and math.isfinite(const)
            if "predicted_coefficient" in r:
                ok = ok and r["constant"] <= r["predicted_coefficient"]
        runs.extend(trio)
    return {"suite": "equivalences", "h": h, "n_fields": n_fields,
            "runs": runs, "pass": ok}


def fully_curved(h: float = 1 / 128, n_dirs: int = 64) -> dict:
    """Degeneracy of the directional boundary seminorm: vanishes (up to
    h) on the flat strip, bounded away from zero on curved boundaries."""
    shapes = {
        "halfspace": {"type": "halfspace",
                      "params": {"width": 2.0, "height": 1.0}},
        "disk": {"type": "disk"},
        "annulus": {"type": "annulus",
                    "params": {"r_inner": 0.4, "r_outer": 1.0}},
        "perturbed": {"type": "perturbed_halfspace"},
    }
    out = {"suite": "fully-curved", "h": h, "domains": {}}
    ok = True
    for name, spec in shapes.items():
        dom = build_domain(spec, h)
        nu = min(0.3, 0.8 * dom.dist.reach_estimate)
        rep = sn.fully_curved_experiment(dom, nu=nu, n_dirs=n_dirs)
        entry = {"nu": nu, "min_value": rep["min_value"],
                 "per_component_min": rep["per_component_min"],
                 "witness_directions": rep["witness_directions"]}
        if name == "halfspace":
            entry["expect"] = "degenerate"
            entry["ok"] = rep["min_value"] <= h
        else:
            entry["expect"] = "bounded-below"
            entry["ok"] = rep["min_value"] >= 0.1
        ok = ok and entry["ok"]
        out["domains"][name] = entry
    out["pass"] = ok
    return out


def whitney_certify(max_level: int = 8) -> dict:
    """Certificates for the five reference domains."""
    from .shapes import shape_from_spec
    shapes = {
        "square": {"type": "square", "params": {"side": 1.0}},
        "disk": {"type": "disk"},
        "annulus": {"type": "annulus",
                    "params": {"r_inner": 0.4, "r_outer": 1.0}},
        "l_shape": {"type": "l_shape"},
        "halfplane": {"type": "box", "params": {"lo": [-1.0, 0.0],
                                                "hi": [1.0, 1.0]}},
    }
    out = {"suite": "whitney-certify", "max_level": max_level,
           "domains": {}}
    ok = True
    for name, spec in shapes.items():
        t0 = time.time()
        dec = wh.whitney_decompose(shape_from_spec(spec),
                                   max_level=max_level)
        cert = dec.certify()
        entry = {"n_cubes": dec.certificate.n_cubes,
                 "all_ok": cert.all_ok,
                 "rho_range": [cert.rho_min, cert.rho_max],
                 "ratio_max": cert.ratio_max,
                 "runtime_seconds": time.time() - t0}
        ok = ok and cert.all_ok
        out["domains"][name] = entry
    out["pass"] = ok
    return out


SUITES = {
    "ze-bound": ze_bound,
    "ze-failure": ze_failure,
    "jones-stability": jones_stability,
    "uniformity": uniformity,
    "frame-residuals": frame_residuals,
    "vfg": vfg_check,
    "counterexample": counterexample,
    "trace-stability": trace_stability,
    "equivalences": equivalences,
    "fully-curved": fully_curved,
    "whitney-certify": whitney_certify,
}


def run_suite(name: str, **kwargs) -> dict:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; known: {sorted(SUITES)}")
    return SUITES[name](**kwargs)
