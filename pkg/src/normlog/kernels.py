"""Selects the compiled kernels when built, else the pure-Python ones.

Set ``NORMLOG_PURE=1`` to force the fallback.
"""
import os

from . import _kernels_py

NAMES = (
    "next_forward", "next_backward", "finally_forward", "finally_backward",
    "globally_forward", "globally_backward", "until_forward", "until_backward",
    "count_range",
)

_impl = _kernels_py
BACKEND = "python"
if os.environ.get("NORMLOG_PURE", "") not in ("1", "true", "yes"):
    try:
        from ._ext import ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

next_forward = _impl.next_forward
next_backward = _impl.next_backward
finally_forward = _impl.finally_forward
finally_backward = _impl.finally_backward
globally_forward = _impl.globally_forward
globally_backward = _impl.globally_backward
until_forward = _impl.until_forward
until_backward = _impl.until_backward
count_range = _impl.count_range
