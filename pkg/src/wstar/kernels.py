"""Backend selection for the summation kernels.

The compiled extension is used when it was built and ``WSTAR_PURE_PYTHON``
is not set to a true value; otherwise the numpy implementation is used.
``BACKEND`` names the active choice.
"""
import os

from . import _kernels_py

_FORCE_PY = os.environ.get("WSTAR_PURE_PYTHON", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _FORCE_PY:
        raise ImportError("pure python requested")
    from . import _ckernels as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _kernels_py
    BACKEND = "numpy"

trig_sum = _impl.trig_sum
sech_sum = _impl.sech_sum
resolvent_sum = _impl.resolvent_sum

__all__ = ["BACKEND", "trig_sum", "sech_sum", "resolvent_sum"]
