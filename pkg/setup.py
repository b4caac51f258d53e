"""Builds the optional compiled stepping engine.

The package works without it (a pure-Python engine is selected at import
time when the extension is missing), so a failed compile must not abort
the install.
"""

import os

from setuptools import Extension, setup

PYX = os.path.join("src", "tolsim", "_engine.pyx")

ext_modules = []
if os.path.exists(PYX):
    try:
        from Cython.Build import cythonize

        # -fno-builtin-{sin,cos,sincos}: keep scalar libm calls so results
        # match the pure-Python engine bit for bit (GCC otherwise fuses
        # sin/cos pairs into sincos, which rounds differently by 1 ulp).
        ext = Extension(
            "tolsim._engine",
            sources=[PYX],
            extra_compile_args=["-O3", "-fno-builtin-sin", "-fno-builtin-cos", "-fno-builtin-sincos"],
        )
        ext.optional = True
        ext_modules = cythonize(
            [ext],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
