from setuptools import setup, Extension

try:
    from Cython.Build import cythonize
    import numpy as np

    ext_modules = cythonize(
        [
            Extension(
                "fecap._kernels",
                ["src/fecap/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    # no Cython available: install pure-Python only, the numpy backend is
    # selected at import time
    ext_modules = []

setup(ext_modules=ext_modules)
