"""Build hook for the optional compiled lattice core.

The package is fully functional without the extension (a pure-Python
implementation of the same algorithm is selected at import time), so the
extension is marked optional: a missing compiler degrades to the fallback
instead of failing the install.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = [
    Extension(
        "aliasmine._lattice_cy",
        ["src/aliasmine/_lattice_cy.pyx"],
        extra_compile_args=["-O3"],
        optional=True,
    )
]

setup(
    ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"})
    if cythonize
    else [],
)
