"""Kernel dispatch: compiled extension when available, numpy otherwise.

Set PHNLS_NO_EXT=1 to force the numpy path (the public surface is
identical either way).  PHNLS_THREADS caps the extension's OpenMP pool.
"""

from __future__ import annotations

import os

import numpy as np

from . import _kernels_np

HAVE_EXT = False
_ext = None
if os.environ.get("PHNLS_NO_EXT", "") != "1":
    try:
        from . import _speedups as _ext
        HAVE_EXT = True
    except ImportError:
        _ext = None

def set_num_threads(k: int) -> None:
    """Cap the extension's OpenMP pool (no-op on the numpy path)."""
    if HAVE_EXT:
        _ext.set_num_threads(k)
    else:
        _kernels_np.set_num_threads(k)


if HAVE_EXT:
    _threads = os.environ.get("PHNLS_THREADS", "")
    if _threads.isdigit() and int(_threads) > 0:
        _ext.set_num_threads(int(_threads))


def contract_cubic(c: np.ndarray, tensor) -> np.ndarray:
    """Resonant cubic contraction of c (points x levels) with the tensor."""
    c = np.ascontiguousarray(c, dtype=complex)
    if HAVE_EXT:
        out = np.empty_like(c)
        _ext.contract_cubic(c, tensor.values, out)
        return out
    return _kernels_np.contract_cubic(c, tensor.np_blocks())


def morawetz_pair_sum(rho: np.ndarray, j1: np.ndarray, j2: np.ndarray,
                      box_len: float) -> float:
    """Unweighted pair sum rho x (unit displacement . current).

    The convolution form is exact and cheap, so it is the production
    path on every grid; the direct O(n^4) sums below exist to verify it.
    """
    return _kernels_np.morawetz_pairs(
        np.ascontiguousarray(rho, dtype=float),
        np.ascontiguousarray(j1, dtype=float),
        np.ascontiguousarray(j2, dtype=float), box_len)


def morawetz_pair_sum_direct(rho: np.ndarray, j1: np.ndarray, j2: np.ndarray,
                             box_len: float) -> float:
    """Same sum by explicit pair enumeration (compiled when available)."""
    rho = np.ascontiguousarray(rho, dtype=float)
    j1 = np.ascontiguousarray(j1, dtype=float)
    j2 = np.ascontiguousarray(j2, dtype=float)
    if HAVE_EXT:
        return float(_ext.morawetz_pairs(rho, j1, j2, box_len))
    return _kernels_np.morawetz_pairs_direct(rho, j1, j2, box_len)
