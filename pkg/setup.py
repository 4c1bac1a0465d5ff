"""Build script for the optional compiled kernels.

The package works without them: ``centralspin.kernels`` falls back to a numpy
implementation when the extension is missing.
"""
from setuptools import setup

try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension
except ImportError:  # pragma: no cover
    ext_modules = []
else:
    extensions = [
        Extension(
            "centralspin._ckernels",
            ["src/centralspin/_ckernels.pyx"],
            include_dirs=[np.get_include()],
            # no -ffast-math: it reassociates the compensated sums
            extra_compile_args=["-O3"],
        )
    ]
    ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})

setup(ext_modules=ext_modules)
