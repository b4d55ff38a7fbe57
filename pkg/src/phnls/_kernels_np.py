"""Pure-numpy implementations of the hot kernels.

These are the reference semantics; the compiled extension in
``_speedups`` reproduces them up to floating-point reassociation.  The
contraction walks the diagonal blocks of the dense resonant slice so the
inner products land in BLAS, and the pair sum becomes a pair of circular
convolutions.
"""

from __future__ import annotations

import numpy as np


def contract_cubic(c: np.ndarray, blocks) -> np.ndarray:
    """Resonant cubic contraction, one row of ``c`` per physical point.

    ``blocks`` is the ``(d, lo, m)`` decomposition from
    ``ResonantTensor.np_blocks``: for fixed d = n1 - n2 the window
    [lo, lo + len(m)) carries both n2 (rows) and n3 (columns), with
    m[n2 - lo, n3 - lo] = D[n2 + d, n2, n3] and output index n3 + d.
    """
    out = np.zeros_like(c)
    for d, lo, m in blocks:
        hi = lo + m.shape[0]
        pair = c[:, lo + d:hi + d] * np.conj(c[:, lo:hi])
        out[:, lo + d:hi + d] += (pair @ m) * c[:, lo:hi]
    return out


def _direction_kernels(n: int, box_len: float):
    """Minimal-image unit-vector kernel sampled on index displacements.

    Component values at exactly half-box separation are zeroed (the two
    images tie), keeping the kernel odd on the discrete torus.
    """
    half = n // 2
    d = np.arange(n)
    ds = ((d + half) % n) - half
    z = np.where(np.abs(ds) == half, 0.0, ds * (box_len / n))
    z1 = z[:, None] + np.zeros((1, n))
    z2 = np.zeros((n, 1)) + z[None, :]
    r = np.hypot(z1, z2)
    with np.errstate(invalid="ignore", divide="ignore"):
        k1 = np.where(r > 0, z1 / r, 0.0)
        k2 = np.where(r > 0, z2 / r, 0.0)
    return k1, k2


def morawetz_pairs(rho: np.ndarray, j1: np.ndarray, j2: np.ndarray,
                   box_len: float) -> float:
    """sum over grid pairs of rho(yt) * unit(y - yt) . J(y).

    Evaluated as two circular convolutions; identical (to roundoff) to the
    direct O(n^4) pair sum.  Cell-area weights are the caller's business.
    """
    n = rho.shape[0]
    k1, k2 = _direction_kernels(n, box_len)
    rho_hat = np.fft.fft2(rho)
    conv1 = np.fft.ifft2(np.fft.fft2(k1) * rho_hat).real
    conv2 = np.fft.ifft2(np.fft.fft2(k2) * rho_hat).real
    return float(np.sum(j1 * conv1 + j2 * conv2))


def morawetz_pairs_direct(rho: np.ndarray, j1: np.ndarray, j2: np.ndarray,
                          box_len: float) -> float:
    """Direct O(n^4) evaluation of the same pair sum, for verification."""
    n = rho.shape[0]
    k1, k2 = _direction_kernels(n, box_len)
    b = np.arange(n)
    total = 0.0
    for a1 in range(n):
        i1 = (a1 - b) % n
        for a2 in range(n):
            i2 = (a2 - b) % n
            kk1 = k1[np.ix_(i1, i2)]
            kk2 = k2[np.ix_(i1, i2)]
            total += float(np.sum(rho * (kk1 * j1[a1, a2]
                                         + kk2 * j2[a1, a2])))
    return total


def set_num_threads(k: int) -> None:  # matching the extension's surface
    pass
