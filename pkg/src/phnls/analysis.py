"""Scattering and concentration monitors, and the limit comparison.

Everything here consumes Field objects and returns plain floats or
row-oriented results ready for CSV serialization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .dcr import simulate_dcr
from .pnls import simulate_pnls
from .propagators import oscillator_flow, rescale
from .state import (Field, dealias, l2h1_norm, l4_y_integrand, mass,
                    sigma_norm, spectral_to_phys)
from .tensor import ResonantTensor


# ---------------------------------------------------------------------------
# interaction functionals

def _density_current(field: Field):
    """x-integrated density and current on the y collocation grid."""
    g = field.grid
    c_phys = spectral_to_phys(g, field.coeffs)
    rho = np.sum(c_phys.real ** 2 + c_phys.imag ** 2, axis=2)
    k1 = g.ky[:, None, None]
    k2 = g.ky[None, :, None]
    d1 = spectral_to_phys(g, 1j * k1 * field.coeffs)
    d2 = spectral_to_phys(g, 1j * k2 * field.coeffs)
    j1 = np.sum((np.conj(c_phys) * d1).imag, axis=2)
    j2 = np.sum((np.conj(c_phys) * d2).imag, axis=2)
    return rho, j1, j2


def morawetz_action(field: Field) -> float:
    """Interaction functional sum_{y,yt} rho(yt) K(y - yt) . J(y) dA^2.

    K is the minimal-image unit vector on the torus, zero at coincident
    points, with any component at exactly half-box separation zeroed so
    that K stays odd; the functional is then exactly invariant under a
    Galilean boost (the boost shifts J by xi rho, and the induced
    rho x rho pairing against an odd kernel cancels identically).
    """
    rho, j1, j2 = _density_current(field)
    raw = _kernels.morawetz_pair_sum(rho, j1, j2, field.grid.box_len)
    return float(field.grid.cell_area ** 2 * raw)


def morawetz_halfderiv(field: Field, cutoff: float = 0.0) -> float:
    """Half-derivative concentration monitor sum_k |k| |rho_hat(k)|^2 / L^2.

    cutoff > 0 first applies the sharp y-frequency projector P_{<=cutoff}
    to the field (not to the density).
    """
    if cutoff < 0:
        raise ValueError(f"cutoff must be nonnegative, got {cutoff}")
    g = field.grid
    coeffs = field.coeffs
    if cutoff > 0.0:
        keep = np.sqrt(g.k2) <= cutoff
        coeffs = coeffs * keep[:, :, None]
    c_phys = spectral_to_phys(g, coeffs)
    rho = np.sum(c_phys.real ** 2 + c_phys.imag ** 2, axis=2)
    rho_hat = np.fft.fft2(rho) * g.cell_area
    kabs = np.sqrt(g.k2)
    return float(np.sum(kabs * np.abs(rho_hat) ** 2) / g.box_len ** 2)


# ---------------------------------------------------------------------------
# scattering monitor

def scattering_monitor(snapshots, system: str) -> np.ndarray:
    """Residuals of the interaction-picture Cauchy test.

    snapshots is a sequence of Fields at strictly increasing times; each
    is pulled back by the inverse linear flow of the named system and
    consecutive pullbacks are differenced in that system's norm (Sigma
    for the confined flow, L^2 H^1 for the resonant one).  A scattering
    solution makes the residual sequence decay; a linear solution makes
    it vanish to roundoff.
    """
    if system not in ("pnls", "dcr"):
        raise ValueError(f"system must be 'pnls' or 'dcr', got {system!r}")
    snaps = list(snapshots)
    if len(snaps) < 2:
        raise ValueError("need at least two snapshots")
    times = [f.time for f in snaps]
    if any(t1 >= t2 for t1, t2 in zip(times, times[1:])):
        raise ValueError(f"snapshot times must be strictly increasing, "
                         f"got {times}")
    g = snaps[0].grid
    lam = 2.0 * np.arange(g.n_h) + 1.0
    pulled = []
    for f in snaps:
        if f.grid.n_h != g.n_h or f.coeffs.shape != snaps[0].coeffs.shape:
            raise ValueError("snapshots live on different grids")
        if system == "pnls":
            w = f.coeffs * np.exp(1j * f.time * (g.k2[:, :, None] + lam))
        else:
            w = f.coeffs * np.exp(1j * f.time * g.k2)[:, :, None]
        pulled.append(Field(grid=f.grid, coeffs=w, time=0.0))
    norm = sigma_norm if system == "pnls" else l2h1_norm
    out = []
    for a, b in zip(pulled, pulled[1:]):
        diff = Field(grid=a.grid, coeffs=b.coeffs - a.coeffs, time=0.0)
        out.append(norm(diff))
    return np.asarray(out)


# ---------------------------------------------------------------------------
# limit comparison

@dataclass(frozen=True)
class ProfileComparison:
    """Per-lambda comparison table between the confined run and the
    rescaled resonant approximation."""

    lam: float
    times: np.ndarray          # physical times lambda^2 t_r
    err_l2h1: np.ndarray
    err_l4acc: np.ndarray
    mass_u: np.ndarray
    mass_w: np.ndarray

    @property
    def err(self) -> float:
        """Scalar figure of merit: worst norm gap plus worst accumulator gap."""
        return float(np.max(self.err_l2h1) + np.max(self.err_l4acc))

    def rows(self):
        for i, t in enumerate(self.times):
            yield (self.lam, float(t), float(self.err_l2h1[i]),
                   float(self.err_l4acc[i]), float(self.mass_u[i]),
                   float(self.mass_w[i]))


def _as_field(phi, grid) -> Field:
    if isinstance(phi, Field):
        return phi
    from .state import from_sampler
    return from_sampler(grid, phi)


def profile_compare(phi, lam_list, t_rescaled_end: float, dt: float, *,
                    grid, tensor: ResonantTensor, coupling: float = 1.0,
                    n_outputs: int = 6, order: int = 2) -> list:
    """Compare the confined flow at scale lambda with its resonant model.

    For each lambda: (a) evolve u from the lambda-rescaled profile to
    physical time lambda^2 t_rescaled_end; (b) evolve the resonant system
    from the unrescaled profile to t_rescaled_end; (c) map the resonant
    solution back by rescaling and the exact trapped-direction phase;
    (d) difference the two in L^2 H^1 and in the accumulated L^4 monitor
    at n_outputs matched output times (the first is t = 0, where the
    fields coincide by construction).

    The grid spacing dt must tile each output segment; the profile phi
    may be a Field on `grid` or a sampler f(y1, y2, x).
    """
    base = dealias(_as_field(phi, grid))
    if base.time != 0.0:
        raise ValueError("the reference profile must start at time 0")
    if n_outputs < 2:
        raise ValueError(f"need at least two output times, got {n_outputs}")
    seg = t_rescaled_end / (n_outputs - 1)
    if abs(seg / dt - round(seg / dt)) > 1e-9:
        raise ValueError(
            f"output segment {seg} is not an integer multiple of dt={dt}")

    results = []
    for lam in lam_list:
        out_r = np.linspace(0.0, t_rescaled_end, n_outputs)
        u = rescale(base, lam)
        v = base
        times, e_nrm, m_u, m_w = [], [], [], []
        l4_u, l4_w = [], []
        for j, t_r in enumerate(out_r):
            t_phys = lam ** 2 * t_r
            if j > 0:
                u = simulate_pnls(u, t_phys, dt, coupling=coupling,
                                  order=order)
                v = simulate_dcr(v, t_r, dt, tensor, coupling=coupling,
                                 order=order)
            w = oscillator_flow(rescale(v, lam), t_phys)
            diff = Field(grid=u.grid, coeffs=u.coeffs - w.coeffs, time=t_phys)
            times.append(t_phys)
            e_nrm.append(l2h1_norm(diff))
            m_u.append(mass(u))
            m_w.append(mass(w))
            l4_u.append(l4_y_integrand(u))
            l4_w.append(l4_y_integrand(w))
        acc_u = _cumtrapz(np.asarray(times), np.asarray(l4_u))
        acc_w = _cumtrapz(np.asarray(times), np.asarray(l4_w))
        results.append(ProfileComparison(
            lam=float(lam), times=np.asarray(times),
            err_l2h1=np.asarray(e_nrm),
            err_l4acc=np.abs(acc_u - acc_w),
            mass_u=np.asarray(m_u), mass_w=np.asarray(m_w)))
    return results


def _cumtrapz(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    if len(t) > 1:
        inc = 0.5 * np.diff(t) * (y[1:] + y[:-1])
        out[1:] = np.cumsum(inc)
    return out
