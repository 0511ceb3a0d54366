"""Build script for the optional compiled kernels.

The Cython extension is optional: when Cython or a C compiler is missing the
package installs without it and ``shapeopt._kernels`` falls back to the
pure-Python implementation.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("SHAPEOPT_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "shapeopt._kernels._ckernels",
                    ["src/shapeopt/_kernels/_ckernels.pyx"],
                    extra_compile_args=["-O3"],
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
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
