"""Optional build of the compiled kernel module.

The package is fully functional without it: segforms.kernels falls back to
the pure-Python implementations when segforms._ckern is absent. Build with

    python setup.py build_ext --inplace

or install with the [accel] extra in an environment with a C compiler.
"""

from setuptools import setup

try:
    from Cython.Build import cythonize
    from setuptools import Extension

    extensions = cythonize(
        [Extension("segforms._ckern", ["src/segforms/_ckern.pyx"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
