"""Kernel backend selection.

The compiled Cython kernels are preferred; the pure NumPy versions are the
fallback. Set ABSGEN_BACKEND=pure (or =native) to force a choice, e.g. for
the benchmark in benchmarks/bench_kernels.py.
"""

import os

from absgen._kernels import _pure

_choice = os.environ.get("ABSGEN_BACKEND", "").lower()

if _choice == "pure":
    _impl = _pure
elif _choice == "native":
    from absgen._kernels import _native as _impl
else:
    try:
        from absgen._kernels import _native as _impl
    except ImportError:
        _impl = _pure

BACKEND = _impl.BACKEND
conv2d_forward = _impl.conv2d_forward
conv2d_backward = _impl.conv2d_backward
maxpool_forward = _impl.maxpool_forward
maxpool_backward = _impl.maxpool_backward


def get_backend(name=None):
    """Return the kernel module for `name` ('pure' or 'native'); default is the active one."""
    if name is None or name == BACKEND:
        return _impl
    if name == "pure":
        return _pure
    if name == "native":
        from absgen._kernels import _native
        return _native
    raise ValueError(f"unknown kernel backend: {name!r}")
