"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise, or when
``MMHETNET_PURE_PYTHON=1`` is set, the NumPy fallback is used.
"""
from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("MMHETNET_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

pgfl_exponent_derivs = _impl.pgfl_exponent_derivs
associate = _impl.associate
interference_sum = _impl.interference_sum

__all__ = ["BACKEND", "pgfl_exponent_derivs", "associate", "interference_sum"]
