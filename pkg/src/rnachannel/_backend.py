"""Backend selection for the hot simulation kernels.

The kernels in ``_kernel`` are plain scalar-numpy Python, so the same source
runs either JIT-compiled or interpreted.  The backend is chosen once per
process from the ``RNACHANNEL_BACKEND`` environment variable:

* ``numba`` (default when numba imports) -- kernels compiled with
  ``numba.njit(cache=True, nogil=True)``.
* ``numpy`` -- interpreted fallback.  numba reproduces numpy's
  ``Generator`` bit streams exactly, so both backends give bit-identical
  results; the fallback is just slow.
"""

import os

_ENV_VAR = "RNACHANNEL_BACKEND"

_requested = os.environ.get(_ENV_VAR, "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise RuntimeError(
        f"{_ENV_VAR} must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    NUMBA_ENABLED = False
else:
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        if _requested == "numba":
            raise
        NUMBA_ENABLED = False

BACKEND = "numba" if NUMBA_ENABLED else "numpy"


if NUMBA_ENABLED:
    from numba import njit

    def jit_kernel(fn):
        return njit(cache=True, nogil=True)(fn)

else:

    def jit_kernel(fn):
        return fn


def backend_name() -> str:
    """Name of the active kernel backend ('numba' or 'numpy')."""
    return BACKEND
