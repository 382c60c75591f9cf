"""Build hook for the optional compiled kernels.

The package works without them; ``moebius_energy.kernels`` falls back to
the numpy implementation when the extension is missing.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("MOEBIUS_ENERGY_NO_EXT", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "moebius_energy.kernels._ckernels",
                    sources=["src/moebius_energy/kernels/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": 3},
        )
    except ImportError:  # no Cython at build time: pure-Python install
        ext_modules = []

setup(ext_modules=ext_modules)
