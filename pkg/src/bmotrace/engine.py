"""Kernel backend selection.

The compiled extension is preferred; the numpy fallback produces
bit-identical results (same visiting order, same sequential reduction)
at lower speed.  Set BMOTRACE_FORCE_FALLBACK=1 to force the fallback,
e.g. for benchmarking or to reproduce an issue without a compiler.
"""

from __future__ import annotations

import os

from . import _kernels_py

_compiled = None
if not os.environ.get("BMOTRACE_FORCE_FALLBACK"):
    try:
        from . import _kernels as _compiled  # type: ignore[no-redef]
    except ImportError:
        _compiled = None

if _compiled is not None:
    BACKEND = "cython"
    _impl = _compiled
else:
    BACKEND = "numpy"
    _impl = _kernels_py

#: both backends, for cross-checks and benchmarks (compiled may be None)
BACKENDS = {"cython": _compiled, "numpy": _kernels_py}


def osc_sums(f_flat, centers_flat, table):
    return _impl.osc_sums(f_flat, centers_flat, table)


def abs_sums(f_flat, centers_flat, table):
    return _impl.abs_sums(f_flat, centers_flat, table)


def masked_abs_sums(f_flat, mask_flat, anchors, table):
    return _impl.masked_abs_sums(f_flat, mask_flat, anchors, table)
