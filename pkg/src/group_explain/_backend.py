"""Kernel backend selection: compiled extension when available, numpy fallback.

Set ``GROUP_EXPLAIN_FORCE_PY=1`` to force the pure-Python kernels (used by the
benchmark and the backend-equivalence tests).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("GROUP_EXPLAIN_FORCE_PY", "") not in ("", "0"):
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py


def backend_name() -> str:
    return kernels.BACKEND
