"""Build script: compiles the optional event-propagation extension.

The package works without the extension (a numpy fallback is selected at
import time), so the build must never fail because of it.
"""

import os

from setuptools import Extension, setup

PYX = "src/spikeseq/burst/_core.pyx"

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None and os.path.exists(PYX):
    ext_modules = cythonize(
        [Extension("spikeseq.burst._core", [PYX], optional=True)],
        language_level=3,
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
