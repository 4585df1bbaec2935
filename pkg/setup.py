"""Build script: compiles the optional Cython kernel extension.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so any failure to cythonize or compile degrades
gracefully to a pure-Python install.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "memamp._kernels._fast",
                ["src/memamp/_kernels/_fast.pyx"],
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
