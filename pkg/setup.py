from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # no Cython: the pure-Python jets are used
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "mwlab.jets._jetcore",
                ["src/mwlab/jets/_jetcore.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
