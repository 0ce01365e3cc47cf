import os

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # build without the compiled core; the numpy fallback is used
    ext_modules = []
else:
    openmp = [] if os.environ.get("HARTREE_NO_OPENMP") else ["-fopenmp"]
    ext_modules = cythonize(
        [
            Extension(
                "hartree._core",
                ["src/hartree/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3", *openmp],
                extra_link_args=openmp,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
