from setuptools import setup
from Cython.Build import cythonize

setup(
    ext_modules=cythonize(
        ["src/hyprank/_editdist.pyx"],
        language_level=3,
    ),
)
