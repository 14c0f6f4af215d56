"""Build script: compiles the optional OpenMP kernel extension.

The package works without the extension (a pure-Python kernel twin is
selected at import time), so a failed compile only costs speed. Set
GRIDFLOW_NO_EXT=1 to skip the extension build entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("GRIDFLOW_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext = Extension(
            "gridflow.numeric._kernels",
            ["src/gridflow/numeric/_kernels.pyx"],
            include_dirs=[np.get_include()],
            extra_compile_args=["-O3", "-fopenmp", "-ffp-contract=off"],
            extra_link_args=["-fopenmp"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize(
            [ext], compiler_directives={"language_level": "3"}
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
