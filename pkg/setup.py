"""Build script: compiles the MPFR orbit kernel when the toolchain allows.

The package works without the extension (pure gmpy2 fallback, selected at
import time by renormlab.kernel), so any build failure here downgrades to a
pure-python install instead of aborting.
"""
import os
import sys
from setuptools import setup

def kernel_extension():
    from setuptools import Extension
    from Cython.Build import cythonize
    import gmpy2

    gmpy2_dir = os.path.dirname(gmpy2.__file__)
    ext = Extension(
        "renormlab._kernel",
        sources=["src/renormlab/_kernel.pyx"],
        include_dirs=[gmpy2_dir],
        libraries=["mpfr", "gmp"],
        extra_compile_args=["-O2"],
    )
    return cythonize([ext], include_path=[gmpy2_dir], language_level=3)

ext_modules = []
if os.environ.get("RENORMLAB_NO_EXTENSION") != "1":
    try:
        ext_modules = kernel_extension()
    except Exception as exc:  # missing cython/gmpy2 headers: fall back to pure python
        sys.stderr.write("renormlab: skipping compiled kernel (%s)\n" % exc)

setup(ext_modules=ext_modules)
