"""Backend selection for the hot kernels.

Set ``SWARMPATH_NO_NUMBA=1`` to force the pure-numpy path even when numba is
installed. Both paths implement identical floating-point recipes.
"""

import os
from typing import Any, Callable

_DISABLED = os.environ.get("SWARMPATH_NO_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError("disabled by SWARMPATH_NO_NUMBA")
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False
    _njit = None


def njit(*args: Any, **kwargs: Any) -> Callable:
    """``numba.njit(cache=True)`` when available, identity otherwise."""
    if _njit is None:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return _njit(*args, **kwargs)


BACKEND = "numba" if HAVE_NUMBA else "numpy"
