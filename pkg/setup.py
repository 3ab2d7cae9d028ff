"""Optional build of the compiled spectrum kernels.

If Cython or a C compiler is unavailable the package installs without the
extension and falls back to numpy at import time.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("EWSPEC_NO_EXT", "") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext = Extension(
            "ewspec._kernels",
            ["src/ewspec/_kernels.pyx"],
            include_dirs=[numpy.get_include()],
            extra_compile_args=["-O3", "-fopenmp"],
            extra_link_args=["-fopenmp"],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        )
        ext_modules = cythonize([ext], language_level=3, quiet=True)

setup(ext_modules=ext_modules)
