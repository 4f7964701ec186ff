from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # Without Cython the package installs with the pure-Python kernels only.
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("grassmann_gauge._ckernels", ["src/grassmann_gauge/_ckernels.pyx"], extra_compile_args=["-O2"])],
        language_level=3,
    )

setup(ext_modules=ext_modules)
