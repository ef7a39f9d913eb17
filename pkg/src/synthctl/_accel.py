"""Numba acceleration with a pure-NumPy fallback.

Hot numeric kernels are written once, in numba-compatible NumPy style, and
compiled with ``@njit`` when the "numba" backend is active. The fallback
backend runs the identical source uncompiled (plain NumPy), which is slower
but has no compilation step and no numba dependency at runtime.

Backend selection, decided once at import time:

* ``SYNTHCTL_BACKEND=numpy``  force the pure-NumPy path;
* ``SYNTHCTL_BACKEND=numba``  require numba (ImportError if missing);
* unset                       numba when importable, NumPy otherwise.

``NUMBA_DISABLE_JIT=1`` is also honoured (numba then runs in object mode,
which we treat as the numpy backend).
"""

from __future__ import annotations

import os

_CHOICE = os.environ.get("SYNTHCTL_BACKEND", "").strip().lower()
if _CHOICE not in ("", "numba", "numpy"):
    raise RuntimeError(f"SYNTHCTL_BACKEND must be 'numba' or 'numpy', got {_CHOICE!r}")

if _CHOICE != "numpy" and os.environ.get("NUMBA_DISABLE_JIT", "0") not in ("0", ""):
    _CHOICE = "numpy"

if _CHOICE == "numpy":
    _BACKEND = "numpy"
else:
    try:
        import numba  # noqa: F401

        _BACKEND = "numba"
    except ImportError:
        if _CHOICE == "numba":
            raise
        _BACKEND = "numpy"


def active_backend() -> str:
    """Name of the kernel backend in use: ``"numba"`` or ``"numpy"``."""
    return _BACKEND


def jit_kernel(func):
    """Compile ``func`` with numba when the numba backend is active.

    Under the numpy backend the function is returned unchanged, so both
    paths execute the same source.
    """
    if _BACKEND == "numba":
        from numba import njit

        return njit(cache=True)(func)
    return func
