"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``DISCFLIGHT_PURE_PYTHON`` is set to a non-empty
value other than ``0``, the NumPy implementation is used.
"""
import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_force_python = os.environ.get("DISCFLIGHT_PURE_PYTHON", "") not in ("", "0")

if _compiled is not None and not _force_python:
    BACKEND = "cython"
    _active = _compiled
else:
    BACKEND = "python"
    _active = _kernels_py

sturm_shoot = _active.sturm_shoot
inward_profile = _active.inward_profile
advance_paths = _active.advance_paths
free_step = _active.free_step


def available_backends():
    return ["cython", "python"] if _compiled is not None else ["python"]


def get_backend(name=None):
    """Kernel module by name (``"cython"`` or ``"python"``); default active one."""
    if name is None:
        return _active
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")
