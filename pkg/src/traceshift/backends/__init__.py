"""Backend selection for the hot numeric kernels.

Two interchangeable builds exist: a numba @njit build and a pure-numpy
fallback. The environment variable TRACESHIFT_BACKEND picks one
("numba" or "numpy"); unset or "auto" prefers numba when it imports,
falling back to numpy otherwise. ``set_backend`` allows an explicit
in-process switch (used by the benchmark and the backend tests).
"""

import os

from . import _numpy

_BACKENDS = {"numpy": _numpy}
_IMPORT_ERROR = None
try:
    from . import _numba
    _BACKENDS["numba"] = _numba
except ImportError as exc:  # pragma: no cover - depends on environment
    _IMPORT_ERROR = exc


def load(name):
    """Return the backend module named "numpy" or "numba"."""
    try:
        return _BACKENDS[name]
    except KeyError:
        if name == "numba" and _IMPORT_ERROR is not None:
            raise ImportError(f"numba backend unavailable: {_IMPORT_ERROR}")
        raise ValueError(f"unknown backend {name!r}; expected 'numpy' or 'numba'")


def _from_env():
    choice = os.environ.get("TRACESHIFT_BACKEND", "auto").lower()
    if choice in ("", "auto"):
        return _BACKENDS.get("numba", _numpy)
    return load(choice)


_ACTIVE = _from_env()


def active():
    """The currently selected backend module."""
    return _ACTIVE


def set_backend(name):
    """Select a backend by name; returns the previously active one."""
    global _ACTIVE
    prev = _ACTIVE
    _ACTIVE = load(name)
    return prev
