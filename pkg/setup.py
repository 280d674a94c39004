from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [Extension("perturblab._speedups", ["src/perturblab/_speedups.pyx"])],
        compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
    )
except ImportError:
    # Pure-Python fallback kernels are used when the extension is absent.
    extensions = []

setup(ext_modules=extensions)
