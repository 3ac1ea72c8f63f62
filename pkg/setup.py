"""Build script for the optional Cython kernels.

The package works without them: ``cursekit._backend`` falls back to the
numpy implementations in ``cursekit._kernels_py`` when the extension is
missing. Set ``CURSEKIT_NO_EXT=1`` to skip compilation entirely.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("CURSEKIT_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "cursekit._kernels",
                    ["src/cursekit/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
