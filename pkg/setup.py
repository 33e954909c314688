"""Build script for the optional compiled recurrent kernels.

The package works without the extension (a pure-NumPy fallback is selected
at import time), so a failed compile must not break installation.
"""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "ecg_bench.kernels._speedups",
                ["src/ecg_bench/kernels/_speedups.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=extensions)
