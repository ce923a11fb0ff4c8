"""Select the token search kernel: the compiled extension if importable, else pure Python.

Set ``REENTRY_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernel_py

if os.environ.get("REENTRY_PURE_PYTHON"):
    _impl = _kernel_py
else:
    try:
        from . import _kernel_c as _impl
    except ImportError:  # extension not built
        _impl = _kernel_py

BACKEND = "cython" if _impl is not _kernel_py else "python"

TokenSearch = _impl.TokenSearch
flatten = _kernel_py.flatten

CLOSED, GUARDED, OPEN, OPEN_BUGGY = (_kernel_py.CLOSED, _kernel_py.GUARDED,
                                     _kernel_py.OPEN, _kernel_py.OPEN_BUGGY)
M_TRANSFER, M_MINT = _kernel_py.M_TRANSFER, _kernel_py.M_MINT
CP_EXT, CP_EXIT, CP_TX = _kernel_py.CP_EXT, _kernel_py.CP_EXIT, _kernel_py.CP_TX
