"""Builds the optional compiled transport kernels.

The package is fully functional without the extension: evidex.transport
falls back to the NumPy kernels when the compiled module is missing.
Build in place with:

    python setup.py build_ext --inplace
"""

import os
import sys

from setuptools import setup

ext_modules = []
try:
    if not os.path.exists("src/evidex/transport/_kernels.pyx"):
        raise ImportError("kernel source not present")
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "evidex.transport._kernels",
                sources=["src/evidex/transport/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError as exc:  # Cython/numpy absent: pure-Python install
    print(f"evidex: skipping compiled kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
