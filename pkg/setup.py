"""Build script for the compiled fixation-scan kernel.

The extension is optional: if it fails to build (no compiler, no Cython),
the package installs anyway and gazestream.fixation falls back to the pure
NumPy implementation at import time.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"[setup] skipping compiled kernel ({exc}); pure-Python fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"[setup] failed to build {ext.name} ({exc}); pure-Python fallback will be used")


def extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "gazestream.fixation._scan",
        sources=["src/gazestream/fixation/_scan.pyx"],
        include_dirs=[np.get_include()],
        # FP contraction off: results must be bit-equal to the pure-Python scan
        extra_compile_args=["-O3", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
