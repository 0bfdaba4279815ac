"""Build script: compiles the optional signature-reduction extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); the compiled core is only a fast path for the
per-node Hermitian pair reduction that dominates runtime.
"""

import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "morselab._speedups",
                ["src/morselab/_speedups.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
