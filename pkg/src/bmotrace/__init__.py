"""Grid-based boundary-oscillation toolkit.

Measures BMO-type interior and boundary seminorms of scalar and vector
fields on rasterized domains, builds dyadic interior decompositions,
extends fields across the boundary several ways, and checks normal
traces, all with a compiled kernel core and a bit-identical pure
NumPy fallback.
"""

from .engine import BACKEND, BACKENDS

__version__ = "0.1.0"
__all__ = ["BACKEND", "BACKENDS", "__version__"]
