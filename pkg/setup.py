"""Build the optional Cython kernels. The package works without them."""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing etc.
            print(f"WARNING: compiled kernels not built ({exc}); using pure Python")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"WARNING: failed to build {ext.name} ({exc}); using pure Python")


def extensions():
    if os.environ.get("RLAF_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    exts = [
        Extension(
            f"rlaf.solvers.{name}",
            [f"src/rlaf/solvers/{name}.pyx"],
            language="c++",
            extra_compile_args=["-O3", "-std=c++17"],
        )
        for name in ("_cdcl_ext", "_lookahead_ext")
        if os.path.exists(f"src/rlaf/solvers/{name}.pyx")
    ]
    return cythonize(exts, compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
