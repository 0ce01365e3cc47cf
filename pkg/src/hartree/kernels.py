"""Backend selection for the hot kernels.

The compiled core is used when it imports; otherwise the numpy port.
Set ``HARTREE_BACKEND=python`` to force the fallback and
``HARTREE_THREADS`` to bound the OpenMP thread count.
"""

import os

import numpy as np

from . import _core_py

if os.environ.get("HARTREE_BACKEND", "").lower() == "python":
    _impl = _core_py
    BACKEND = "python"
else:
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _core_py
        BACKEND = "python"


def num_threads():
    """Thread count from ``HARTREE_THREADS``, defaulting to all cores."""
    raw = os.environ.get("HARTREE_THREADS")
    if raw is None or raw.strip() == "":
        return os.cpu_count() or 1
    n = int(raw)
    if n < 1:
        raise ValueError("HARTREE_THREADS must be a positive integer")
    return n


def angular_integral(t, N):
    """Integral over [0, pi] of sin^(N-2) / (1 + t^2 - 2 t cos)^2, per ``t``."""
    t = np.ascontiguousarray(np.atleast_1d(t), dtype=float)
    return _impl.angular_integral(t, int(N), num_threads())


def pair_kernel(r, N, exponent):
    """Dense max^-exponent * angular(min/max) for nodes ``r``; zero diagonal."""
    r = np.ascontiguousarray(r, dtype=float)
    return _impl.pair_kernel(r, int(N), int(exponent), num_threads())


def matvec(a, x):
    """Deterministic ``a @ x`` whose result does not depend on the thread count."""
    a = np.ascontiguousarray(a, dtype=float)
    x = np.ascontiguousarray(x, dtype=float)
    return _impl.row_matvec(a, x, num_threads())
