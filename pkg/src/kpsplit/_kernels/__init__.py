"""Hot sLdG kernels: compiled when available, NumPy otherwise.

The compiled module is picked at import time. Setting ``KPSPLIT_PURE_PYTHON=1``
forces the NumPy implementation. Both modules expose ``sldg_rows`` and
``trace_points`` with identical signatures.
"""

from __future__ import annotations

import os
from types import ModuleType

from ..errors import InvalidArgument
from . import _sldg_py as python_backend

compiled_backend: ModuleType | None
try:
    from . import _sldg_c as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and os.environ.get("KPSPLIT_PURE_PYTHON") != "1":
    backend: ModuleType = compiled_backend
    BACKEND = "cython"
else:
    backend = python_backend
    BACKEND = "python"

FIXED = python_backend.FIXED
SECANT = python_backend.SECANT
NEWTON = python_backend.NEWTON


def get_backend(name: str | None = None) -> ModuleType:
    """Return the kernel module ``"cython"``, ``"python"`` or the active one."""
    if name is None:
        return backend
    if name == "python":
        return python_backend
    if name == "cython":
        if compiled_backend is None:
            raise ImportError("compiled kernels are not built")
        return compiled_backend
    raise InvalidArgument(f"unknown backend {name!r}")
