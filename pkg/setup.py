"""Build the optional compiled kernels.

The package works without them: ``marginlab._kernels`` falls back to a
pure-Python implementation when the extension is not importable.
"""
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # no Cython: ship the fallback only
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "marginlab._kernels._core",
                ["src/marginlab/_kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )

setup(ext_modules=ext_modules)
