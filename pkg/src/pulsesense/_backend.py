"""Kernel backend selection.

The compiled extension is used when it imports cleanly; otherwise the
pure-Python module takes over. ``PULSESENSE_PURE=1`` forces the fallback.
"""
import os

if os.environ.get("PULSESENSE_PURE", "") not in ("", "0"):
    from . import _pycore as kernels
else:
    try:
        from . import _core as kernels
    except ImportError:
        from . import _pycore as kernels

BACKEND = kernels.NAME

__all__ = ["kernels", "BACKEND"]
