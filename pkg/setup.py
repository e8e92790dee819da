"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a pure numpy
backend is selected at import time); building it just makes the hot
loops fast. Set SCESAME_SKIP_EXT=1 to force a pure-Python install.
"""

import os

from setuptools import setup


def extension_modules():
    if os.environ.get("SCESAME_SKIP_EXT", "0") not in ("", "0"):
        return []
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        print("scesame: Cython/numpy unavailable, building without the compiled kernels")
        return []
    ext = Extension(
        "scesame._kernels._ext",
        sources=["src/scesame/_kernels/_ext.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "initializedcheck": False,
            "cdivision": True,
        },
    )


setup(ext_modules=extension_modules())
