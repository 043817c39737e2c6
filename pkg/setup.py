import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "delayexp._kernels_cy",
                ["src/delayexp/_kernels_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # No Cython at build time: install the pure-NumPy package only.
    # delayexp._kernels falls back to the Python kernels at import.
    ext_modules = []

setup(ext_modules=ext_modules)
