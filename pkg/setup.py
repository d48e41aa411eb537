import numpy as np
from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = cythonize(
    [
        Extension(
            "group_explain._kernels",
            ["src/group_explain/_kernels.pyx"],
            include_dirs=[np.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            optional=True,
        )
    ],
    language_level=3,
)

setup(ext_modules=extensions)
