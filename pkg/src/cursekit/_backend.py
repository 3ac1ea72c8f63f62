"""Kernel selection: compiled extension if importable, numpy otherwise.

``CURSEKIT_PURE=1`` forces the numpy fallback.
"""
import os

from . import _kernels_py

if os.environ.get("CURSEKIT_PURE"):
    _ext = None
else:
    try:
        from . import _kernels as _ext
    except ImportError:
        _ext = None

kernels = _ext if _ext is not None else _kernels_py
COMPILED = _ext is not None


def thread_count() -> int:
    """Worker threads for subset/box loops; ``CURSEKIT_THREADS`` caps it."""
    env = os.environ.get("CURSEKIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1
