"""Hot-loop kernels, compiled when available.

``BACKEND`` is ``"cython"`` or ``"python"``.  Setting ``BPL_PURE_PYTHON=1``
before import forces the numpy fallback.
"""
import os

from . import _kernels_py

if os.environ.get("BPL_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = "python" if _impl is _kernels_py else "cython"

alternating_sum = _impl.alternating_sum
layered_overlaps = _impl.layered_overlaps
layered_trace = _impl.layered_trace

__all__ = ["BACKEND", "alternating_sum", "layered_overlaps", "layered_trace"]
