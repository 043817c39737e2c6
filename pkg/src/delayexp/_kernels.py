"""Kernel backend selection: compiled extension if built, NumPy otherwise.

Set DELAYEXP_KERNELS=python or DELAYEXP_KERNELS=compiled to force a backend
(the latter raises at import if the extension is missing).
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels_cy
except ImportError:
    _kernels_cy = None

_choice = os.environ.get("DELAYEXP_KERNELS", "auto").lower()
if _choice == "python":
    _impl = _kernels_py
elif _choice == "compiled":
    if _kernels_cy is None:
        raise ImportError(
            "DELAYEXP_KERNELS=compiled but the delayexp._kernels_cy extension is not built"
        )
    _impl = _kernels_cy
elif _choice == "auto":
    _impl = _kernels_cy if _kernels_cy is not None else _kernels_py
else:
    raise ImportError(f"DELAYEXP_KERNELS={_choice!r}: expected auto, python or compiled")

ACTIVE_BACKEND: str = _impl.BACKEND_NAME
HAVE_COMPILED: bool = _kernels_cy is not None

fill_p_table = _impl.fill_p_table
delay_layers = _impl.delay_layers


def backends() -> dict:
    """Name -> module for every available backend (for benchmarks/tests)."""
    found = {"python": _kernels_py}
    if _kernels_cy is not None:
        found["compiled"] = _kernels_cy
    return found
