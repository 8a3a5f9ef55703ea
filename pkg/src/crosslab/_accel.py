"""Backend selection for the hot kernels.

Set ``CROSSLAB_DISABLE_NUMBA=1`` to force the pure-numpy path.  Both paths
consume identical step buffers, so results are bit-identical.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

DISABLE_NUMBA = os.environ.get("CROSSLAB_DISABLE_NUMBA", "").strip() not in ("", "0")
USE_NUMBA = numba is not None and not DISABLE_NUMBA


def njit(func):
    """Compile with numba when it is importable; otherwise return ``func``.

    Compiled kernels keep the original function at ``.py_func`` so the
    fallback path can run the same loop in plain Python.
    """
    if numba is None:
        func.py_func = func
        return func
    return numba.njit(cache=True, nogil=True)(func)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
