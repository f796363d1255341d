"""Build the optional Cython kernels.

If Cython or a C compiler is missing the package still installs and the
pure-numpy fallback in ``urbancentrality._kernels_py`` is used at runtime.
"""
import os

import numpy as np
from setuptools import setup
from setuptools.extension import Extension

ext_modules = []
if not os.environ.get("URBANCENTRALITY_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "urbancentrality._kernels",
                    ["src/urbancentrality/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
