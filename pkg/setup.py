"""Build script.

The compiled kernel module is optional: if Cython or a C compiler is
missing the package installs anyway and falls back to the pure-numpy
kernels at import time.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "bmotrace._kernels",
                ["src/bmotrace/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - depends on build env
    import sys

    print(f"bmotrace: building without compiled kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
