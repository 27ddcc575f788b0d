"""Numba switch.

Set ``LATTC_NO_NUMBA=1`` to run every kernel through its pure-numpy path.
"""
import os

USE_NUMBA = os.environ.get("LATTC_NO_NUMBA", "").strip().lower() not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

if not USE_NUMBA:

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
