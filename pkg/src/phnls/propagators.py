"""Exact flows and symmetry maps.

All maps here are pure operators: they return a new Field (or profile) and
never advance the stored time stamp; the simulation loops own the clock.
The two linear flows are diagonal in the stored basis and therefore exactly
unitary; the Mehler route realizes the trapped-direction flow through its
integral kernel instead and is used as an independent cross-check of the
diagonal one.
"""

from __future__ import annotations

import numpy as np

from .hermite import HermiteRule, SpectralProfile, analyze, synthesize
from .state import Field, make_grid

CAUSTIC_MARGIN = 1e-3


def free_y_flow(field: Field, dt: float) -> Field:
    """e^{i dt Laplace_y}: multiplies each mode by e^{-i |k|^2 dt}."""
    phase = np.exp(-1j * dt * field.grid.k2)[:, :, None]
    return Field(grid=field.grid, coeffs=field.coeffs * phase,
                 time=field.time)


def oscillator_flow(field: Field, dt: float) -> Field:
    """e^{i dt (d^2/dx^2 - x^2)}: multiplies level n by e^{-i (2n+1) dt}."""
    lam = 2.0 * np.arange(field.grid.n_h) + 1.0
    phase = np.exp(-1j * dt * lam)
    return Field(grid=field.grid, coeffs=field.coeffs * phase,
                 time=field.time)


def _mehler_matrix(t: float, rule: HermiteRule) -> np.ndarray:
    x = rule.nodes
    s = np.sin(2.0 * t)
    c = np.cos(2.0 * t)
    pref = (2.0j * np.pi * s) ** -0.5  # principal branch, valid for |t| < pi/2
    xx = x[:, None] * x[None, :]
    sq = 0.5 * (x * x)[:, None] + 0.5 * (x * x)[None, :]
    return pref * np.exp(1j * (sq * c - xx) / s)


def mehler_apply(profile: SpectralProfile, t: float,
                 rule: HermiteRule) -> SpectralProfile:
    """Trapped-direction flow through the oscillator kernel.

    The time is reduced mod pi (each half period contributes a factor -1), so
    the principal branch of the square root is always the right one.  Times
    within CAUSTIC_MARGIN of a multiple of pi/2 are rejected: there the
    kernel degenerates to a point mass (or a flip) and no fixed quadrature
    rule can represent it.

    Resolution: the kernel row at node x_j oscillates at frequency
    x_j / |sin 2t|, so content at level n is reproduced accurately only when
    roughly  count >= (2n+1) (1 + 1/|sin 2t|)^2 / 2.  At count=96 and t=0.3
    that means levels n <= 5 (or smooth profiles) to ~1e-7; count=192 covers
    all of n < 24 to machine precision.  Use oscillator_flow when exactness
    matters; this route exists as its independent cross-check.
    """
    half_periods = int(np.round(t / np.pi))
    tr = t - np.pi * half_periods
    if min(abs(tr), abs(np.pi / 2 - abs(tr))) < CAUSTIC_MARGIN:
        raise ValueError(
            f"t={t} is within {CAUSTIC_MARGIN} of a caustic (the kernel is "
            "singular at multiples of pi/2); use the diagonal flow there")
    kernel = _mehler_matrix(tr, rule)
    samples = synthesize(profile, rule)
    image = kernel @ (rule.wexp * samples)
    out = analyze(image, rule)
    sign = -1.0 if half_periods % 2 else 1.0
    return SpectralProfile(coeffs=sign * out.coeffs)


def galilean_boost(field: Field, xi0, t: float) -> Field:
    """Boost u -> e^{i(y.xi0 - t|xi0|^2)} u(y - 2 xi0 t, x) in coefficients.

    xi0 must sit on the dual lattice (2 pi / L) Z^2 so the modulation is a
    lattice character; then the map is exact: a roll of the mode array times
    unimodular phases.
    """
    g = field.grid
    xi0 = np.asarray(xi0, dtype=float)
    if xi0.shape != (2,):
        raise ValueError(f"xi0 must be a 2-vector, got shape {xi0.shape}")
    steps = xi0 * g.box_len / (2.0 * np.pi)
    m = np.rint(steps)
    if np.max(np.abs(steps - m)) > 1e-9:
        raise ValueError(
            f"xi0={xi0.tolist()} is not on the dual lattice "
            f"(2 pi / {g.box_len}) * integers")
    m1, m2 = int(m[0]), int(m[1])

    rolled = np.roll(field.coeffs, (m1, m2), axis=(0, 1))
    # after the roll, index k holds the old mode k - xi0
    k_shift1 = np.roll(g.ky, m1)   # = (k - xi0) component 1
    k_shift2 = np.roll(g.ky, m2)
    phase1 = np.exp(-2j * t * xi0[0] * k_shift1)
    phase2 = np.exp(-2j * t * xi0[1] * k_shift2)
    norm = np.exp(-1j * t * float(xi0 @ xi0))
    out = rolled * (norm * phase1[:, None] * phase2[None, :])[:, :, None]
    return Field(grid=g, coeffs=out, time=field.time)


def rescale(field: Field, lam: float) -> Field:
    """Mass-invariant dilation u -> u(y/lam, x)/lam for lam = 2^m.

    In this normalization the coefficient array is unchanged; only the box
    metadata moves (box_len -> lam * box_len), because the dilated field's
    modes sit index-for-index on the refined dual lattice.  Exact.
    """
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")
    log2 = np.log2(lam)
    if abs(log2 - np.rint(log2)) > 1e-12:
        raise ValueError(f"lam must be a power of two, got {lam}")
    g = field.grid
    new_grid = make_grid(g.n_y, lam * g.box_len, g.n_h, rule=g.rule)
    return Field(grid=new_grid, coeffs=field.coeffs.copy(), time=field.time)
