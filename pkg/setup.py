import os

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# exact IEEE ordering and no sin+cos -> sincos fusion: the compiled core must
# match the pure-Python step bit for bit
compile_args = ["-O3", "-ffp-contract=off", "-fno-fast-math", "-fno-builtin-sin", "-fno-builtin-cos"]
link_args = []
if os.environ.get("KRAMERS_RESET_NO_OPENMP") != "1":
    compile_args.append("-fopenmp")
    link_args.append("-fopenmp")

extensions = [
    Extension(
        "kramers_reset._core",
        ["src/kramers_reset/_core.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=compile_args,
        extra_link_args=link_args,
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}))
