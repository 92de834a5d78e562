"""Build script: compiles the optional Cython stepping kernel.

The package works without the extension (a pure-Python fallback is selected
at import time); set RQTRAJ_NO_EXT=1 to skip compilation explicitly.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("RQTRAJ_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "rqtraj._kernels._ode",
                    ["src/rqtraj/_kernels/_ode.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": 3},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
