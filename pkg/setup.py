import os

import numpy as np
from setuptools import Extension, setup

# Set KPSPLIT_NO_EXT=1 to install the pure-Python package only.
ext_modules = []
if os.environ.get("KPSPLIT_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "kpsplit._kernels._sldg_c",
                    ["src/kpsplit/_kernels/_sldg_c.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
