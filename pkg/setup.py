"""Build script: compiles the optional Cython speedup module.

The package is fully functional without the extension (a pure-numpy
fallback is selected at import time), so any failure here is reported
but not fatal.  Set PHNLS_NO_EXT=1 to skip the compile entirely.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """build_ext that degrades to a warning instead of aborting the install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"WARNING: building phnls._speedups failed ({exc}); "
            "falling back to the pure-numpy kernels",
            file=sys.stderr,
        )


ext_modules = []
cmdclass = {}
if os.environ.get("PHNLS_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext = Extension(
            "phnls._speedups",
            ["src/phnls/_speedups.pyx"],
            include_dirs=[numpy.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            extra_compile_args=["-O3", "-fopenmp"],
            extra_link_args=["-fopenmp"],
        )
        ext_modules = cythonize(
            [ext],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
        cmdclass["build_ext"] = optional_build_ext
    except ImportError as exc:
        print(f"WARNING: Cython unavailable ({exc}); installing without the "
              "compiled kernels", file=sys.stderr)

setup(ext_modules=ext_modules, cmdclass=cmdclass)
