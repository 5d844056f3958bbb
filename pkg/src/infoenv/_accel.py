"""Backend selection for the hot kernels.

Numba is used when it imports cleanly and ``INFOENV_NO_NUMBA`` is unset (or
set to ``0``/``false``).  Otherwise the pure-numpy implementations in
:mod:`infoenv._kernels` are dispatched instead.
"""

from __future__ import annotations

import os

_FALSE = {"", "0", "false", "no", "off"}


def _numba_requested() -> bool:
    return os.environ.get("INFOENV_NO_NUMBA", "").strip().lower() in _FALSE


try:
    import numba as _numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _numba_requested()


def njit(func):
    """Compile ``func`` with ``numba.njit(cache=True)`` if numba is available.

    The undecorated function is returned when numba is missing, so kernels
    stay importable (and slow) either way.
    """
    if not HAVE_NUMBA:
        return func
    return _numba.njit(cache=True)(func)


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
