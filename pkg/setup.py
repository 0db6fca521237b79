"""Builds the optional compiled kernels.

The package is fully functional without the extension; covlqr.kernels falls
back to the numpy implementations when `covlqr._native` is absent.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize
    import numpy as np

    ext = Extension(
        "covlqr._native",
        ["src/covlqr/_native.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level=3)
except ImportError:
    pass

setup(ext_modules=ext_modules)
