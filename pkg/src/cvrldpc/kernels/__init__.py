"""Decoder hot kernels with a selectable backend.

``_numba`` carries ``@njit(nogil=True, cache=True)`` implementations of the
flooding decoders; ``_numpy`` is a pure-numpy fallback with identical call
signatures. For fixed-point decoding the two produce bit-identical outcomes
(the quantized grid makes every arithmetic step exact); in float mode they
can differ in final ulps because summation order and libm differ.

Selection: set ``CVRLDPC_BACKEND`` to ``numba`` or ``numpy``. Unset picks
numba when importable, else numpy. The numba module is imported lazily so
the fallback path never pays JIT startup.
"""

from __future__ import annotations

import os

from . import _numpy

_ENV_VAR = "CVRLDPC_BACKEND"
_numba_mod = None
_numba_failed = False


def _load_numba():
    global _numba_mod, _numba_failed
    if _numba_mod is None and not _numba_failed:
        try:
            from . import _numba as mod

            _numba_mod = mod
        except ImportError:
            _numba_failed = True
    return _numba_mod


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if _load_numba() is not None else ("numpy",)


def get_backend(name: str | None = None):
    """Resolve a kernel module by name, env var, or auto-detection."""
    if name is None:
        name = os.environ.get(_ENV_VAR, "").strip().lower() or None
    if name is None:
        name = "numba" if _load_numba() is not None else "numpy"
    if name == "numba":
        mod = _load_numba()
        if mod is None:
            raise RuntimeError(
                "numba backend requested via CVRLDPC_BACKEND but numba "
                "could not be imported"
            )
        return mod
    if name == "numpy":
        return _numpy
    raise ValueError(f"unknown kernel backend {name!r} (use 'numba' or 'numpy')")


def active_backend_name() -> str:
    return "numpy" if get_backend() is _numpy else "numba"
