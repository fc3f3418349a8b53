"""numba shim.

Set ``SOLITONLAB_DISABLE_JIT=1`` to run every kernel through its pure-numpy
fallback (useful for debugging and for environments without numba).
``SOLITONLAB_THREADS`` caps numba's thread pool.
"""

import os

_disabled = os.environ.get("SOLITONLAB_DISABLE_JIT", "").strip().lower() in {"1", "true", "yes"}

try:
    if _disabled:
        raise ImportError
    import numba
    from numba import njit

    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the bundled TBB is often too old; omp/workqueue are always usable
        numba.config.THREADING_LAYER = "omp"

    JIT_ENABLED = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    JIT_ENABLED = False

    def njit(func=None, **kwargs):
        if func is not None:
            return func

        def wrapper(f):
            return f

        return wrapper


def configure_threads():
    cap = os.environ.get("SOLITONLAB_THREADS")
    if not cap or numba is None:
        return None
    n = max(1, min(int(cap), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


configure_threads()
