"""Resonant interaction tensor of the trapped direction.

The cubic resonance couples Hermite levels with n4 = n1 - n2 + n3 through

    D[n1, n2, n3, n4] = int h_{n1} h_{n2} h_{n3} h_{n4} dx,

stored densely over the three free indices as values[n1, n2, n3]
(= the entry with n4 = n1 - n2 + n3, or 0 when that index falls outside
[0, n_max)).  All entries on the resonant set have even total degree, so none
vanish by parity.  Entries are exact Gauss values: the quartic product rule
integrates them with no truncation error once count >= 2 * n_max.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hermite import HermiteRule, quartic_sampling


@dataclass(frozen=True)
class ResonantTensor:
    """Resonant slice `values` plus (optionally) the full overlap array
    quad_overlaps[n1, n2, n3, n4], needed by the Hamiltonian."""

    n_max: int
    values: np.ndarray
    quad_overlaps: np.ndarray | None = None

    def np_blocks(self) -> list[tuple[int, np.ndarray]]:
        """Diagonal blocks (d, M_d) with M_d[j2, j3] = values[j2+d, j2, j3+max(0,-d)...]
        prepared once for the BLAS fallback contraction; cached on first use."""
        blocks = self.__dict__.get("_blocks")
        if blocks is None:
            n = self.n_max
            blocks = []
            for d in range(-(n - 1), n):
                lo = max(0, -d)
                hi = n - max(0, d)
                if hi <= lo:
                    continue
                # rows: n2 over the valid window; cols: n3 over the same window
                w = np.arange(lo, hi)
                m = np.ascontiguousarray(
                    self.values[w + d, w][:, lo:hi].astype(complex))
                blocks.append((d, lo, m))
            object.__setattr__(self, "_blocks", blocks)
        return blocks


def _require_count(rule: HermiteRule, needed: int, what: str) -> None:
    if rule.count < needed:
        raise ValueError(
            f"quadrature count {rule.count} too small for {what}: "
            f"requires count >= {needed}")


def compute_tensor(n_max: int, rule: HermiteRule,
                   with_overlaps: bool = False) -> ResonantTensor:
    """Build the resonant tensor for levels 0..n_max-1.

    Requires rule.count >= 2 * n_max so every entry (polynomial degree up to
    4*(n_max - 1) against e^{-2x^2}) is integrated exactly.  When
    with_overlaps is set, the dense overlap array over all four indices is
    attached as well (n_max^4 floats; only sensible for moderate n_max).
    """
    if n_max < 0:
        raise ValueError(f"n_max must be nonnegative, got {n_max}")
    if n_max == 0:
        return ResonantTensor(n_max=0, values=np.zeros((0, 0, 0)))
    _require_count(rule, 2 * n_max, f"the n_max={n_max} tensor")

    basis, w4 = quartic_sampling(rule, n_max)
    values = np.zeros((n_max, n_max, n_max))
    for d in range(-(n_max - 1), n_max):
        lo = max(0, -d)
        hi = n_max - max(0, d)
        # A[m, j] = sqrt(w) h_j h_{j+d} at the scaled nodes; the block
        # G = A^T A fills values[j+d, j, j3] for j, j3 in the window
        a = np.sqrt(w4)[:, None] * basis[:, lo:hi] * basis[:, lo + d:hi + d]
        g = a.T @ a
        rows = np.arange(lo, hi)
        values[(rows + d)[:, None], rows[:, None], rows[None, :]] = g

    overlaps = None
    if with_overlaps:
        wb = w4[:, None] * basis
        overlaps = np.einsum("ma,mb,mc,md->abcd", wb, basis, basis, basis,
                             optimize=True)
        overlaps.flags.writeable = False
    values.flags.writeable = False
    return ResonantTensor(n_max=n_max, values=values, quad_overlaps=overlaps)


def quad_overlap(n1: int, n2: int, n3: int, n4: int,
                 rule: HermiteRule) -> float:
    """Single overlap integral int h_{n1} h_{n2} h_{n3} h_{n4} dx."""
    idx = (n1, n2, n3, n4)
    if any(n < 0 for n in idx):
        raise ValueError(f"indices must be nonnegative, got {idx}")
    if (n1 + n2 + n3 + n4) % 2 == 1:
        return 0.0  # odd total parity
    needed = (n1 + n2 + n3 + n4) // 2 + 1
    _require_count(rule, needed, f"the overlap {idx}")
    basis, w4 = quartic_sampling(rule, max(idx) + 1)
    return float(np.sum(w4 * basis[:, n1] * basis[:, n2] * basis[:, n3]
                        * basis[:, n4]))


def tensor_checksum(t: ResonantTensor) -> float:
    """Deterministic sum of |entries|, for regression pinning."""
    return float(np.sum(np.abs(t.values)))
