import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("XRI_SKIP_SPEEDUPS"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "xri._kernels._speedups",
                    ["src/xri/_kernels/_speedups.pyx"],
                    optional=True,
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # No Cython: the pure-Python kernels are used instead.
        ext_modules = []

setup(ext_modules=ext_modules)
