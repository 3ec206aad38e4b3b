"""Build script: compiles the optional Cython pairwise-metric kernel.

The extension is a pure speedup; if the C toolchain or Cython is missing the
install still succeeds and detgeom falls back to the numpy kernels at import.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "detgeom._kernels",
                ["src/detgeom/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - toolchain-dependent
    print(f"detgeom: skipping compiled kernels ({exc}); numpy fallback will be used",
          file=sys.stderr)

setup(ext_modules=ext_modules)
