import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python fallback is used at runtime
    cythonize = None

ext_modules = []
if cythonize is not None and not os.environ.get("ITOAR_NO_EXT"):
    ext_modules = cythonize(
        [
            Extension(
                "itoar.kernels._ckernels",
                ["src/itoar/kernels/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                # no fast-math and no FMA contraction: the complex LU path must
                # reproduce the real path bit-for-bit on real data
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )

setup(ext_modules=ext_modules)
