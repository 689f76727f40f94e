"""Kernel backend selection.

The compiled extension is used when it imports cleanly; otherwise (or when
``QLIMIT_PURE_PYTHON`` is set to a non-empty value) the pure-Python kernels
are used. Both expose the same functions.
"""
import importlib
import os

from . import _kernels_py

if os.environ.get("QLIMIT_PURE_PYTHON"):
    kernels = _kernels_py
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _kernels_py

BACKEND = kernels.BACKEND


def available_backends():
    names = ["python"]
    try:
        importlib.import_module("qlimit._kernels")
    except ImportError:
        return names
    return ["cython", "python"]


def get_kernels(name):
    """Return the kernel module for ``name`` ("cython" or "python")."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        return importlib.import_module("qlimit._kernels")
    raise ValueError(f"unknown backend {name!r}")
