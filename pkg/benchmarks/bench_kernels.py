"""Compare the compiled kernels against the numpy fallback.

Runs the three sup-scan entry points through the public seminorm
functions on a disk domain, once per backend, checks the results agree
bit for bit, and prints wall times with the speedup.

Usage: python3 benchmarks/bench_kernels.py [--h 1/64] [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from bmotrace import engine
from bmotrace import seminorms as sn
from bmotrace.fields import random_scalar_field
from bmotrace.grids import build_domain


def _best_of(fn, repeat: int) -> tuple:
    best = float("inf")
    value = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - t0)
    return value, best


def run(h: float, repeat: int) -> int:
    if engine.BACKENDS["cython"] is None:
        print("compiled backend unavailable; nothing to compare")
        return 1

    dom = build_domain({"type": "disk"}, h)
    f = np.where(dom.mask, random_scalar_field(dom.grid, seed=0xBE),
                 0.0)
    jobs = {
        "bmo mu=0.25": lambda: sn.bmo_seminorm(f, dom, mu=0.25).value,
        "b nu=0.2": lambda: sn.b_seminorm(f, dom, nu=0.2).value,
        "tube_l1 d=0.2": lambda: sn.tube_l1(f, dom, 0.2, 0.25).value,
        "miyachi": lambda: sn.miyachi_norm(f, dom).value,
    }

    print(f"disk at h = {h:g}: {int(dom.mask.sum())} cells, "
          f"best of {repeat}")
    print(f"{'kernel':<14} {'cython':>10} {'numpy':>10} {'speedup':>9}")
    worst = 0.0
    saved = engine._impl
    for name, job in jobs.items():
        job()  # warm the domain's shared offset caches before timing
        times = {}
        values = {}
        for backend in ("cython", "numpy"):
            engine._impl = engine.BACKENDS[backend]
            values[backend], times[backend] = _best_of(job, repeat)
        engine._impl = saved
        if values["cython"] != values["numpy"]:
            print(f"  MISMATCH in {name}: {values['cython']!r} "
                  f"vs {values['numpy']!r}")
            worst = float("inf")
        ratio = times["numpy"] / times["cython"]
        print(f"{name:<14} {times['cython']:>9.3f}s {times['numpy']:>9.3f}s "
              f"{ratio:>8.1f}x")
    if worst > 0:
        return 1
    print("all backend pairs agree bit for bit")
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h", default="1/64")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    num, _, den = args.h.partition("/")
    h = float(num) / float(den) if den else float(num)
    return run(h, args.repeat)


if __name__ == "__main__":
    raise SystemExit(main())
