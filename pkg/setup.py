"""Builds the optional Cython kernels; the package falls back to pure Python without them."""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("NCSCALE_NO_EXTENSION", "") in ("", "0"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("ncscale._kernels", ["src/ncscale/_kernels.pyx"],
                       include_dirs=[numpy.get_include()],
                       extra_compile_args=["-O3"])],
            compiler_directives={"language_level": 3, "boundscheck": False, "wraparound": False},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
