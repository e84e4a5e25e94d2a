"""Build the optional compiled eigensolver core.

The package works without it: ``embedlab.linalg`` falls back to a
vectorised NumPy implementation when the extension is missing.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("EMBEDLAB_NO_EXT") != "1":
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
                    "embedlab._jacobi",
                    ["src/embedlab/_jacobi.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3", "-fcx-limited-range"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
