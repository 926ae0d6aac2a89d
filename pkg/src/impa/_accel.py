"""Numba switch.

Set ``IMPA_DISABLE_NUMBA=1`` to run every kernel through its pure-numpy
path.  ``PARAMP_THREADS`` caps the numba worker pool.
"""

import os
import warnings

_FALSY = {"", "0", "false", "no", "off"}

USE_NUMBA = os.environ.get("IMPA_DISABLE_NUMBA", "").strip().lower() in _FALSY

if USE_NUMBA:
    warnings.filterwarnings("ignore", message="The TBB threading layer")
    try:
        import numba
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

if USE_NUMBA:
    from numba import prange

    def jit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        return numba.njit(*args, **kwargs)

else:

    def jit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def decorator(func):
            return func

        return decorator

    prange = range


def configure_threads():
    """Apply ``PARAMP_THREADS`` to the numba thread pool; return the count used."""
    raw = os.environ.get("PARAMP_THREADS")
    if not USE_NUMBA:
        return 1
    if raw is None:
        return numba.get_num_threads()
    try:
        n = int(raw)
    except ValueError:
        return numba.get_num_threads()
    n = max(1, min(n, numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n
