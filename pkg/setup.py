"""Builds the optional compiled core; the package falls back to numpy without it."""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("LPFRONTIER_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "lpfrontier._core",
                    ["src/lpfrontier/_core.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )

setup(ext_modules=ext_modules)
