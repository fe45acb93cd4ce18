import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("SWEXTRAP_NO_EXT", "") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "swextrap.densekit._eigcore",
                    ["src/swextrap/densekit/_eigcore.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": 3},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
