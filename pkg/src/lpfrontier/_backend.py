"""Select the compiled core when available, numpy otherwise.

Set ``LPFRONTIER_PURE_PYTHON=1`` to force the numpy path.
"""

import os

from . import _core_py

BACKEND = "python"
window_sums = _core_py.window_sums
band_matrix = _core_py.band_matrix

if not os.environ.get("LPFRONTIER_PURE_PYTHON"):
    try:
        from . import _core
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        window_sums = _core.window_sums
        band_matrix = _core.band_matrix
