"""Backend dispatch for the numeric hot loops.

Two interchangeable implementations exist for the inner kernels (the
annihilation sweep over sparse amplitude tables and the crossing-cluster
quadrature contraction):

* ``numba`` -- @njit-compiled loops (default when numba imports), and
* ``numpy`` -- a pure-numpy fallback.

Selection is made once at import time from the ``QLEVY_BACKEND``
environment variable (``numba`` or ``numpy``).  Both paths produce the
same candidate arrays element for element; the numerical results agree
to the last few ulps, so the choice is about speed only.  See
``benchmarks/bench_backends.py`` for a head-to-head timing.
"""

from __future__ import annotations

import os
import warnings

from . import _numpy_impl

_requested = os.environ.get("QLEVY_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ValueError(
        f"QLEVY_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )


def _select():
    if _requested == "numpy":
        return _numpy_impl, "numpy"
    try:
        from . import _numba_impl
    except ImportError:
        if _requested == "numba":
            warnings.warn(
                "QLEVY_BACKEND=numba requested but numba is not importable; "
                "falling back to the numpy backend",
                RuntimeWarning,
            )
        return _numpy_impl, "numpy"
    return _numba_impl, "numba"


_active, BACKEND = _select()

annihilation_candidates = _active.annihilation_candidates
contract_cluster = _active.contract_cluster


def backend_name() -> str:
    """Name of the backend selected at import time."""
    return BACKEND
