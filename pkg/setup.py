"""Builds the optional compiled hash kernels.

The package works without the extension (pqc2.kernels falls back to the
pure-Python backend), so a failed compile only costs speed.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    extensions = []
else:
    extensions = cythonize(
        [
            Extension(
                "pqc2.kernels._core",
                ["src/pqc2/kernels/_core.pyx"],
                libraries=["crypto"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )

for ext in extensions:
    ext.optional = True

setup(ext_modules=extensions)
