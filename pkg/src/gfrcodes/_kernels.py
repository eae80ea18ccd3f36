"""Kernel dispatch: numba-compiled elimination when available, numpy otherwise.

Set ``GFR_PURE_NUMPY=1`` to force the numpy path (the benchmark under
``benchmarks/`` imports both implementations directly to compare them).
"""

import os

ENV_PURE_NUMPY = "GFR_PURE_NUMPY"


def _numba_available():
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def _pure_numpy_requested():
    return os.environ.get(ENV_PURE_NUMPY, "").strip().lower() not in ("", "0", "false", "no")


HAS_NUMBA = _numba_available()
USING_NUMBA = HAS_NUMBA and not _pure_numpy_requested()

if USING_NUMBA:
    from ._kernels_numba import gf_property2_scan, gf_rank, gf_solve, gf_subset_ranks
else:
    from ._kernels_numpy import gf_property2_scan, gf_rank, gf_solve, gf_subset_ranks

__all__ = [
    "ENV_PURE_NUMPY",
    "HAS_NUMBA",
    "USING_NUMBA",
    "gf_property2_scan",
    "gf_rank",
    "gf_solve",
    "gf_subset_ranks",
    "warm_up",
]

_WARMED = False


def warm_up():
    """Trigger JIT compilation once so timed sections do not pay for it."""
    global _WARMED
    if _WARMED:
        return
    import numpy as np

    log = np.zeros(4, dtype=np.int64)
    log[2] = 1
    log[3] = 2
    exp = np.array([1, 2, 3, 1, 2, 3], dtype=np.int64)
    mat = np.array([[1, 2], [3, 1]], dtype=np.int64)
    gf_rank(mat.copy(), log, exp, 4)
    gf_solve(mat.copy(), np.array([[1], [2]], dtype=np.int64), log, exp, 4)
    masks = np.array([[True, True]])
    gf_subset_ranks(mat, masks, log, exp, 4)
    gf_property2_scan(mat, np.array([-1, -1], dtype=np.int64), 1, 1, 2, log, exp, 4)
    _WARMED = True
