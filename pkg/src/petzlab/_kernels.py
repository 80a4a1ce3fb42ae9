"""Select the Jacobi kernel at import time.

The compiled extension is used when importable; set ``PETZLAB_PURE_PYTHON=1``
to force the pure-Python fallback.
"""

import os

from petzlab import _jacobi_py

if os.environ.get("PETZLAB_PURE_PYTHON"):
    jacobi_eigh = _jacobi_py.jacobi_eigh
    BACKEND = "python"
else:
    try:
        from petzlab._jacobi import jacobi_eigh
        BACKEND = "cython"
    except ImportError:
        jacobi_eigh = _jacobi_py.jacobi_eigh
        BACKEND = "python"
