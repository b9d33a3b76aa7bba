"""Build script: compiles the optional Levenshtein extension.

The package is fully functional without the extension (a pure-Python
fallback is selected at import time); set CRISISAL_SKIP_EXT=1 to skip
compilation entirely.
"""

import os

from setuptools import setup


def _extensions():
    if os.environ.get("CRISISAL_SKIP_EXT") == "1":
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        ["src/crisisal/_kernels/_levenshtein.pyx"],
        compiler_directives={"language_level": "3"},
    )


setup(ext_modules=_extensions())
