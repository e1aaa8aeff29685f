"""Hot inner loops, compiled when the extension is available.

The compiled module is preferred at import.  Set ``ITOAR_KERNELS=python`` to
force the numpy fallback (useful for debugging and for the benchmark).
"""

import importlib
import os

_NAMES = ("mgs_pass", "weighted_mgs_pass", "lu_factor", "lu_solve")


def load(name):
    """Return the kernel module for ``name`` in {"cython", "python"}."""
    if name == "cython":
        return importlib.import_module("itoar.kernels._ckernels")
    if name == "python":
        return importlib.import_module("itoar.kernels._pykernels")
    raise ValueError(f"unknown kernel backend {name!r}")


def available():
    out = ["python"]
    try:
        load("cython")
    except ImportError:
        return out
    return ["cython"] + out


def _select():
    wanted = os.environ.get("ITOAR_KERNELS", "").strip().lower()
    if wanted == "python":
        return "python", load("python")
    try:
        return "cython", load("cython")
    except ImportError:
        if wanted == "cython":
            raise
        return "python", load("python")


BACKEND, _impl = _select()

mgs_pass = _impl.mgs_pass
weighted_mgs_pass = _impl.weighted_mgs_pass
lu_factor = _impl.lu_factor
lu_solve = _impl.lu_solve

__all__ = ["BACKEND", "available", "load", *_NAMES]
