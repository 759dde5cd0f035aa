"""Build script for the optional compiled sampling kernel.

The package is pure Python except for ``edcsim._sampler``, a Cython
extension that accelerates Monte Carlo click sampling.  If Cython or a C
compiler is unavailable the build falls back to the NumPy implementation
(``edcsim._sampler_py``) selected at import time, so installation never
fails on the extension.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Try to build the extension; warn and continue on failure."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._skip(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._skip(exc)

    @staticmethod
    def _skip(exc):
        print(
            f"WARNING: compiled sampler not built ({exc}); "
            "edcsim will use the pure NumPy kernel",
            file=sys.stderr,
        )


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("WARNING: Cython not found; skipping compiled sampler", file=sys.stderr)
        return []
    ext = Extension(
        "edcsim._sampler",
        ["src/edcsim/_sampler.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=_extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
