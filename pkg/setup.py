import numpy
from setuptools import setup
from setuptools.extension import Extension

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "tfim_cluster._overlap_cy",
                ["src/tfim_cluster/_overlap_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    # pure-python fallback is selected at import time, so a cython-less
    # install still works
    ext_modules = []

setup(ext_modules=ext_modules)
