"""Backend selection for the hot kernels.

The package ships a compiled (numba) implementation and a pure NumPy
fallback of the Godunov fast-sweeping eikonal solver, the batched
Thomas tridiagonal solver and the fused AOS update.  Selection is
controlled by the environment variable SELSEG_BACKEND:

    unset / ""  -> numba if importable, else silent fallback to numpy
    "numba"     -> numba, ImportError if unavailable
    "numpy"     -> pure NumPy

Both implementations converge to the same fixed points; only runtime
differs.  The active choice is exposed as BACKEND.
"""

import os

_requested = os.environ.get("SELSEG_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"SELSEG_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    from . import numpy_impl as _impl

    BACKEND = "numpy"
else:
    try:
        from . import numba_impl as _impl

        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        from . import numpy_impl as _impl

        BACKEND = "numpy"

solve_eikonal = _impl.solve_eikonal
solve_tridiag_batch = _impl.solve_tridiag_batch
aos_update = _impl.aos_update

BIG = _impl.BIG

__all__ = ["BACKEND", "BIG", "aos_update", "solve_eikonal", "solve_tridiag_batch"]
