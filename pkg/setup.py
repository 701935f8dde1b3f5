"""Build the optional Cython kernels.

The package works without them; ``vecon.kernels`` falls back to numpy when
the compiled module cannot be imported.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("VECON_NO_EXT") != "1":
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
                    "vecon._ckernels",
                    ["src/vecon/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
