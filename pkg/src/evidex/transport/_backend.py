"""Kernel backend selection.

The compiled Cython kernels are preferred when importable; the NumPy
fallback is always available. Set EVIDEX_PURE_PYTHON=1 to force the
fallback (used by the benchmark to compare both).
"""

from __future__ import annotations

import os

from . import _kernels_py

_impl = _kernels_py
if not os.environ.get("EVIDEX_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled

        _impl = _compiled
    except ImportError:
        pass


def kernels():
    return _impl


def backend_name() -> str:
    return _impl.BACKEND_NAME


def get_kernels(name: str):
    """Explicit backend lookup, for benchmarks and backend-parity tests."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        from . import _kernels as _compiled

        return _compiled
    raise ValueError(f"unknown backend {name!r}")
