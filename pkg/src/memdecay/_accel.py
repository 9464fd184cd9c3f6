"""Optional numba acceleration.

Set ``MEMDECAY_DISABLE_NUMBA=1`` to force the pure-numpy code paths (also
used automatically when numba is not importable).
"""

import os

DISABLE_ENV = "MEMDECAY_DISABLE_NUMBA"

_disabled = os.environ.get(DISABLE_ENV, "").strip().lower() in {"1", "true", "yes", "on"}

njit = None
if not _disabled:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a soft dependency
        njit = None

NUMBA_AVAILABLE = njit is not None


def backend() -> str:
    return "numba" if NUMBA_AVAILABLE else "numpy"
