"""Batched RS row lengths for Monte Carlo.

Uses numba when it is installed and falls back to the vectorised numpy
kernel in ``rs_core`` otherwise; both return identical integers.
"""
from __future__ import annotations

import numpy as np

from .rs_core import batch_first_rows

try:  # optional accelerator
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None


def _rows_python(perms: np.ndarray, kmax: int) -> tuple[np.ndarray, np.ndarray]:
    lis = batch_first_rows(perms, kmax)
    lds = batch_first_rows(perms[:, ::-1], kmax)
    return lis, lds


if numba is not None:

    @numba.njit(cache=True)
    def _insert_all(perm, kmax, reverse, rows, lengths):
        n = perm.shape[0]
        for r in range(kmax):
            lengths[r] = 0
        for step in range(n):
            a = perm[n - 1 - step] if reverse else perm[step]
            for r in range(kmax):
                ln = lengths[r]
                # leftmost entry greater than a (entries are distinct)
                lo, hi = 0, ln
                while lo < hi:
                    mid = (lo + hi) // 2
                    if rows[r, mid] > a:
                        hi = mid
                    else:
                        lo = mid + 1
                if lo == ln:
                    rows[r, ln] = a
                    lengths[r] = ln + 1
                    break
                bumped = rows[r, lo]
                rows[r, lo] = a
                a = bumped

    @numba.njit(cache=True)
    def _rows_numba(perms, kmax):
        reps, n = perms.shape
        lis = np.zeros((reps, kmax), dtype=np.int64)
        lds = np.zeros((reps, kmax), dtype=np.int64)
        rows = np.zeros((kmax, n + 1), dtype=np.int64)
        lengths = np.zeros(kmax, dtype=np.int64)
        for t in range(reps):
            _insert_all(perms[t], kmax, False, rows, lengths)
            for r in range(kmax):
                lis[t, r] = lengths[r]
            # LDS of a permutation is LIS of its reversal
            _insert_all(perms[t], kmax, True, rows, lengths)
            for r in range(kmax):
                lds[t, r] = lengths[r]
        return lis, lds


def rows_both(perms: np.ndarray, kmax: int, backend: str = "auto") -> tuple[np.ndarray, np.ndarray]:
    """First ``kmax`` row and column lengths of the RS shape, per permutation.

    Rows shorter than ``kmax`` are reported as 0.
    """
    perms = np.ascontiguousarray(perms, dtype=np.int64)
    if perms.ndim != 2:
        raise ValueError("expected an (R, n) array")
    if backend == "numpy" or (backend == "auto" and numba is None):
        return _rows_python(perms, kmax)
    if numba is None:
        raise RuntimeError("numba backend requested but numba is not installed")
    return _rows_numba(perms, kmax)


HAVE_NUMBA = numba is not None
