"""Kernel backend selection.

The compiled extension (``sau._kernels``) is preferred when importable; the
vectorized numpy module (``sau._kernels_py``) is the always-available
fallback. The environment variable SAU_BACKEND forces the choice:

    SAU_BACKEND=auto      prefer compiled, fall back to python (default)
    SAU_BACKEND=compiled  require the extension, ImportError if missing
    SAU_BACKEND=python    force the numpy fallback
"""

import os

from . import _kernels_py

__all__ = [
    "BACKEND", "backend_name", "available_backends",
    "erf_array", "sau_arrays",
    "FORM_STANDARD", "FORM_EXACT", "FORM_ZERO_CENTERED",
]

FORM_STANDARD = _kernels_py.FORM_STANDARD
FORM_EXACT = _kernels_py.FORM_EXACT
FORM_ZERO_CENTERED = _kernels_py.FORM_ZERO_CENTERED


def _load_compiled():
    from . import _kernels
    return _kernels


def _select():
    choice = os.environ.get("SAU_BACKEND", "auto").strip().lower() or "auto"
    if choice == "python":
        return _kernels_py
    if choice == "compiled":
        return _load_compiled()
    if choice == "auto":
        try:
            return _load_compiled()
        except ImportError:
            return _kernels_py
    raise ValueError(
        f"SAU_BACKEND={choice!r} not recognized; "
        f"expected 'auto', 'compiled', or 'python'")


_impl = _select()

BACKEND = _impl.NAME
erf_array = _impl.erf_array
sau_arrays = _impl.sau_arrays


def backend_name():
    """Name of the kernel backend selected at import time."""
    return BACKEND


def available_backends():
    """Names of the backends importable in this installation."""
    names = []
    try:
        _load_compiled()
        names.append("compiled")
    except ImportError:
        pass
    names.append("python")
    return names
