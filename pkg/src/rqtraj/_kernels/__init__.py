"""Stepping-kernel backend selection.

Prefers the compiled Cython extension; falls back to the pure-Python
implementation with identical signatures and arithmetic.  ``BACKEND``
reports which one is active ("compiled" or "python");
RQTRAJ_FORCE_FALLBACK=1 forces the Python path (used by the parity tests
and the benchmark).
"""

import os

if os.environ.get("RQTRAJ_FORCE_FALLBACK"):
    from . import fallback as _impl

    BACKEND = "python"
else:
    try:
        from . import _ode as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import fallback as _impl

        BACKEND = "python"

euler_pair = _impl.euler_pair
rk4_pair = _impl.rk4_pair

__all__ = ["euler_pair", "rk4_pair", "BACKEND"]
