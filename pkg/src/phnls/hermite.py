"""Hermite-function basis: evaluation, Gauss quadrature, 1-D transforms.

The basis functions are the L^2(R)-orthonormal eigenfunctions of the shifted
harmonic oscillator -d^2/dx^2 + x^2, with eigenvalues 2n + 1:

    h_0(x) = pi^(-1/4) exp(-x^2/2),
    h_{n+1}(x) = sqrt(2/(n+1)) x h_n(x) - sqrt(n/(n+1)) h_{n-1}(x).

All evaluation goes through this normalized recurrence, which keeps values
bounded for every n supported here (no factorial overflow).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln

N_MAX = 4096  # recurrence is validated up to this degree

_LOG_PI = float(np.log(np.pi))


def _check_degree(n: int) -> int:
    if not isinstance(n, (int, np.integer)):
        raise TypeError(f"Hermite degree must be an integer, got {type(n).__name__}")
    if n < 0 or n > N_MAX:
        raise ValueError(f"Hermite degree must satisfy 0 <= n <= {N_MAX}, got {n}")
    return int(n)


def basis_matrix(x: np.ndarray, n_cols: int) -> np.ndarray:
    """Matrix B with B[m, n] = h_n(x[m]) for 0 <= n < n_cols."""
    if n_cols < 1 or n_cols > N_MAX + 1:
        raise ValueError(f"n_cols must be in [1, {N_MAX + 1}], got {n_cols}")
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (n_cols,), dtype=float)
    out[..., 0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if n_cols > 1:
        out[..., 1] = np.sqrt(2.0) * x * out[..., 0]
    for n in range(1, n_cols - 1):
        out[..., n + 1] = np.sqrt(2.0 / (n + 1)) * x * out[..., n] \
            - np.sqrt(n / (n + 1.0)) * out[..., n - 1]
    return out


def eval_hermite(n: int, x) -> np.ndarray:
    """Evaluate h_n at the points x (scalar or array)."""
    n = _check_degree(n)
    x = np.asarray(x, dtype=float)
    return basis_matrix(x, n + 1)[..., n]


def hermite_center_value(n: int) -> float:
    """h_n(0), in closed form.

    Zero for odd n; for even n the magnitude is computed through log-gamma so
    the result stays exact to roundoff at large degree, with sign (-1)^(n/2).
    """
    n = _check_degree(n)
    if n % 2 == 1:
        return 0.0
    half = n // 2
    log_mag = 0.5 * gammaln(n + 1) - half * np.log(2.0) - gammaln(half + 1) \
        - 0.25 * _LOG_PI
    return float((-1.0) ** half * np.exp(log_mag))


def delta_hminus1_partial(n_top: int) -> float:
    """Partial sum  sum_{n=0}^{n_top} h_n(0)^2 / (2n+1).

    These are the squared H^{-1}-weighted coefficients of the delta function
    at the origin; the sum converges (increments decay like n^{-3/2}) and the
    limit equals int_0^inf (2 pi sinh 2s)^{-1/2} ds.
    """
    if n_top < 0:
        raise ValueError(f"n_top must be nonnegative, got {n_top}")
    n = np.arange(0, n_top + 1, 2, dtype=float)
    log_sq = gammaln(n + 1) - n * np.log(2.0) - 2.0 * gammaln(n / 2 + 1) \
        - 0.5 * _LOG_PI
    return float(np.sum(np.exp(log_sq) / (2.0 * n + 1.0)))


@dataclass(frozen=True)
class HermiteRule:
    """Gauss-Hermite rule plus the sampled basis.

    ``weights`` follow the classical e^{-x^2} convention:
    int f(x) e^{-x^2} dx ~= sum weights * f(nodes).  They underflow for the
    extreme nodes once count is large, so all internal transforms use
    ``wexp = weights * exp(nodes^2)`` instead, which is computed directly from
    the Christoffel identity  wexp_m = 1 / sum_{k<count} h_k(node_m)^2  and
    stays finite at every size.  ``basis[m, n] = h_n(node_m)``.
    """

    count: int
    nodes: np.ndarray
    weights: np.ndarray
    wexp: np.ndarray
    basis: np.ndarray

    @property
    def n_h(self) -> int:
        return self.basis.shape[1]


def build_quadrature(count: int, n_h: int) -> HermiteRule:
    """Gauss-Hermite rule with `count` nodes carrying the first n_h basis
    functions, via the Golub-Welsch eigenproblem for the Jacobi matrix."""
    if count < 1:
        raise ValueError(f"count must be positive, got {count}")
    if n_h < 1 or n_h > N_MAX + 1:
        raise ValueError(f"n_h must be in [1, {N_MAX + 1}], got {n_h}")
    if count == 1:
        nodes = np.zeros(1)
    else:
        off = np.sqrt(np.arange(1, count) / 2.0)
        nodes, _ = eigh_tridiagonal(np.zeros(count), off, select="a")
        nodes = 0.5 * (nodes - nodes[::-1])  # enforce exact +- symmetry

    # Christoffel weights: accumulate sum_k h_k(x)^2 with a rolling recurrence
    # so count = O(10^3) needs no count^2 storage.
    hk = np.pi ** -0.25 * np.exp(-0.5 * nodes * nodes)
    acc = hk * hk
    prev = np.zeros_like(hk)
    for k in range(count - 1):
        prev, hk = hk, np.sqrt(2.0 / (k + 1)) * nodes * hk \
            - np.sqrt(k / (k + 1.0)) * prev
        acc += hk * hk
    wexp = 1.0 / acc
    with np.errstate(under="ignore"):
        weights = wexp * np.exp(-nodes * nodes)

    basis = basis_matrix(nodes, n_h)
    for arr in (nodes, weights, wexp, basis):
        arr.flags.writeable = False
    return HermiteRule(count=count, nodes=nodes, weights=weights, wexp=wexp,
                       basis=basis)


@dataclass(frozen=True)
class SpectralProfile:
    """Coefficients of a 1-D function in the h_n basis."""

    coeffs: np.ndarray

    @property
    def n_h(self) -> int:
        return self.coeffs.shape[-1]


def analyze(samples: np.ndarray, rule: HermiteRule) -> SpectralProfile:
    """Project point values at rule.nodes onto the basis.

    Exact (to roundoff) on any function in the span of the first n_h basis
    functions whenever count >= n_h, since the discrete Gram of the rule is
    the identity there.
    """
    samples = np.asarray(samples)
    if samples.shape[-1] != rule.count:
        raise ValueError(
            f"samples last axis ({samples.shape[-1]}) must match rule.count "
            f"({rule.count})")
    return SpectralProfile(coeffs=(samples * rule.wexp) @ rule.basis)


def synthesize(profile: SpectralProfile, rule: HermiteRule) -> np.ndarray:
    """Point values at rule.nodes of the function with the given coefficients."""
    coeffs = np.asarray(profile.coeffs)
    if coeffs.shape[-1] != rule.basis.shape[1]:
        raise ValueError(
            f"profile has {coeffs.shape[-1]} coefficients but the rule carries "
            f"{rule.basis.shape[1]} basis functions")
    return coeffs @ rule.basis.T


def quartic_sampling(rule: HermiteRule, n_cols: int) -> tuple[np.ndarray, np.ndarray]:
    """Sampled basis and weights for integrals of four basis functions.

    Substituting x = u/sqrt(2) turns h_a h_b h_c h_d (a polynomial times
    e^{-2x^2}) into a polynomial times the plain Gauss weight e^{-u^2}, so the
    rule with nodes/sqrt(2) and weights wexp/sqrt(2) integrates any such
    product exactly once 2*count - 1 covers the polynomial degree.  Returns
    (basis at the scaled nodes, scaled weights).  Note the scaled rule is NOT
    orthonormal for the discrete Gram; it is only for these product integrals.
    """
    basis = basis_matrix(rule.nodes / np.sqrt(2.0), n_cols)
    return basis, rule.wexp / np.sqrt(2.0)


def hs_norm(profile: SpectralProfile, s: float) -> float:
    """Oscillator Sobolev norm: (sum_n (2n+1)^s |c_n|^2)^(1/2)."""
    c = np.asarray(profile.coeffs)
    lam = 2.0 * np.arange(c.shape[-1]) + 1.0
    return float(np.sqrt(np.sum(lam ** s * np.abs(c) ** 2)))
