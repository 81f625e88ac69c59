from setuptools import setup

try:
    from Cython.Build import cythonize
except ImportError:
    # Without Cython the package still installs; the parser falls back to
    # the pure-Python match kernel at import time.
    ext_modules = []
else:
    ext_modules = cythonize(
        "src/semgram/parsing/_matchcore.pyx",
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules)
