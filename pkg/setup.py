import os

from setuptools import Extension, setup

# PETZLAB_PURE_PYTHON=1 skips the extension; the package then runs on the
# pure-Python Jacobi kernel.
ext_modules = []
if not os.environ.get("PETZLAB_PURE_PYTHON"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("petzlab._jacobi", ["src/petzlab/_jacobi.pyx"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
