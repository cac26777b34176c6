"""Raster kernel selection.

The compiled extension is used when it was built and imports cleanly;
setting KPTROP_PURE_PYTHON=1 forces the reference implementation.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("KPTROP_PURE_PYTHON", "") != "1":
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

argmax_grid = _impl.argmax_grid
exact_u_grid = _impl.exact_u_grid
