"""Recurrent kernel backend selection.

The compiled Cython backend (``_speedups``) is used when its extension module
imported cleanly; otherwise the pure-NumPy reference (``pyref``) takes over.
Set ``ECG_BENCH_NO_EXT=1`` to force the reference backend. Both backends
implement the same function contracts; results agree to rounding error but
are not guaranteed bit-identical across backends (each backend is itself
fully deterministic).
"""
import os

from . import pyref

try:
    from . import _speedups
except ImportError:
    _speedups = None

_force_py = os.environ.get("ECG_BENCH_NO_EXT", "") not in ("", "0")
active = pyref if (_speedups is None or _force_py) else _speedups


def backend_name() -> str:
    return active.NAME


def available_backends() -> dict:
    out = {"python": pyref}
    if _speedups is not None:
        out["compiled"] = _speedups
    return out


def get_backend(name: str):
    try:
        return available_backends()[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}") from None
