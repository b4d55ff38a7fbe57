"""The resonant limit system and its integrator.

The trapped direction enters only through the resonant tensor: the
nonlinearity F acts level-diagonally in y and couples Hermite levels on
the set n4 = n1 - n2 + n3.  Two independent evaluation routes are kept
deliberately separate: the tensor contraction (production path) and the
oscillator-period average

    F(v) = (1/pi) int_0^pi e^{-i tau A} ( |e^{i tau A} v|^2 e^{i tau A} v ) dtau,

with A the trapped-direction Hamiltonian, discretized by the equispaced
trapezoid rule, which is exact once the panel count exceeds every phase
the cubic generates (integer multiples of 2, bounded by 2 * (2 n_h - 2)).
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .propagators import free_y_flow
from .state import (DEFAULT_EPS0, Field, dealias, kinetic_e0,
                    phys_to_spectral, spectral_to_phys)
from .tensor import ResonantTensor
from .pnls import _check_finite, _make_record, _rmm, _step_count, _validate_run


def _require_tensor(field: Field, tensor: ResonantTensor) -> None:
    if tensor.n_max != field.grid.n_h:
        raise ValueError(
            f"tensor covers {tensor.n_max} levels but the grid carries "
            f"n_h={field.grid.n_h}")


def evaluate_F_tensor(field: Field, tensor: ResonantTensor) -> Field:
    """Resonant nonlinearity by direct tensor contraction (dealiased)."""
    _require_tensor(field, tensor)
    g = field.grid
    c_phys = spectral_to_phys(g, field.coeffs)
    flat = c_phys.reshape(-1, g.n_h)
    out_flat = _kernels.contract_cubic(flat, tensor)
    out = phys_to_spectral(g, out_flat.reshape(c_phys.shape))
    out *= g.dealias_mask[:, :, None]
    return Field(grid=g, coeffs=out, time=field.time)


def evaluate_F_average(field: Field, m_tau: int) -> Field:
    """Resonant nonlinearity by averaging the conjugated cubic flow.

    Never touches the tensor; this is the independent cross-check route.
    The equispaced trapezoid over tau in [0, pi] is exact once m_tau
    exceeds every generated frequency, i.e. for m_tau >= 2 * n_h
    (frequencies are 2(n1 - n2 + n3 - n), bounded by 2(2 n_h - 2)).
    """
    g = field.grid
    if m_tau < 2 * g.n_h:
        raise ValueError(
            f"m_tau={m_tau} cannot resolve the generated phases: "
            f"requires m_tau >= {2 * g.n_h} for n_h={g.n_h}")
    c_phys = spectral_to_phys(g, field.coeffs)
    flat = c_phys.reshape(-1, g.n_h)
    levels = 2.0 * np.arange(g.n_h) + 1.0
    bt = g.scaled_basis.T
    acc = np.zeros_like(flat)
    for l in range(m_tau):
        tau = math.pi * l / m_tau
        fwd = np.exp(-1j * levels * tau)
        w = flat * fwd
        u = _rmm(w, bt)
        dens = u.real ** 2 + u.imag ** 2
        cubic = _rmm((dens * u) * g.scaled_weights, g.scaled_basis)
        acc += cubic * np.conj(fwd)
    out_flat = acc / m_tau
    out = phys_to_spectral(g, out_flat.reshape(c_phys.shape))
    out *= g.dealias_mask[:, :, None]
    return Field(grid=g, coeffs=out, time=field.time)


def dcr_step(field: Field, dt: float, tensor: ResonantTensor) -> Field:
    """Strang composition: exact half free y-flows around one classical
    fourth-order explicit substep for the nonlinear part."""
    _require_tensor(field, tensor)
    g = field.grid

    def rhs(coeffs):
        f = Field(grid=g, coeffs=coeffs, time=field.time)
        return -1j * evaluate_F_tensor(f, tensor).coeffs

    half = np.exp(-0.5j * dt * g.k2)[:, :, None]
    c = field.coeffs * half
    k1 = rhs(c)
    k2 = rhs(c + 0.5 * dt * k1)
    k3 = rhs(c + 0.5 * dt * k2)
    k4 = rhs(c + dt * k3)
    c = c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return Field(grid=g, coeffs=c * half, time=field.time + dt)


def simulate_dcr(init: Field, t_end: float, dt: float,
                 tensor: ResonantTensor, sinks=(), *, coupling: float = 1.0,
                 order: int = 2, diag_every: int = 0,
                 eps0: float = DEFAULT_EPS0) -> Field:
    """March the resonant system from init.time to t_end.

    Mirrors simulate_pnls: uniform steps with a shortened final one,
    diagnostics at step 0, every diag_every-th step and the final step.
    coupling scales the nonlinearity (0 gives the free y-flow); the
    energy column of emitted records uses the correspondingly scaled
    Hamiltonian, or NaN when the tensor carries no overlap array.
    `order` is accepted for interface parity (the nonlinear substep is
    fourth order already, the outer splitting symmetric second order).
    """
    _validate_run(dt, coupling, order)
    _require_tensor(init, tensor)
    field = dealias(init)
    t0 = init.time
    n_steps = _step_count(t0, t_end, dt)
    if coupling == 1.0:
        scaled = tensor
    else:
        q = tensor.quad_overlaps
        scaled = ResonantTensor(
            n_max=tensor.n_max, values=tensor.values * coupling,
            quad_overlaps=None if q is None else q * coupling)

    def emit(step: int) -> None:
        if sinks and diag_every > 0:
            energy = (dcr_energy(field, scaled)
                      if scaled.quad_overlaps is not None else math.nan)
            rec = _make_record(field, step, energy, eps0)
            for sink in sinks:
                sink(rec)

    emit(0)
    for j in range(1, n_steps + 1):
        target = t_end if j == n_steps else t0 + j * dt
        step_dt = target - field.time
        if coupling == 0.0:
            field = free_y_flow(field, step_dt)
        else:
            field = dcr_step(field, step_dt, scaled)
        field = Field(grid=field.grid, coeffs=field.coeffs, time=target)
        _check_finite(field, j)
        if j == n_steps or (diag_every > 0 and j % diag_every == 0):
            emit(j)
    return field


def dcr_kinetic_e0(field: Field) -> float:
    """Conserved trapped-direction energy sum_n (2n+1) ||v_n||^2."""
    return kinetic_e0(field)


def _gather_resonant(quad_overlaps: np.ndarray) -> np.ndarray:
    """dq[n1, n2, n3] = Q[n1, n2, n3, n1 - n2 + n3] (zero off the band)."""
    n = quad_overlaps.shape[0]
    idx = np.arange(n)
    n1g, n2g, n3g = np.meshgrid(idx, idx, idx, indexing="ij")
    n4 = n1g - n2g + n3g
    valid = (n4 >= 0) & (n4 < n)
    dq = np.zeros((n, n, n))
    dq[valid] = quad_overlaps[n1g[valid], n2g[valid], n3g[valid], n4[valid]]
    return dq


def dcr_energy(field: Field, tensor: ResonantTensor) -> float:
    """Hamiltonian of the resonant flow.

    E = (1/2) sum_n int |grad_y v_n|^2 dy
      + (1/4) sum_{n1+n3 = n2+n4} Q[n1,n2,n3,n4] int v1 vbar2 v3 vbar4 dy,

    where Q is the full four-index overlap array: the tensor must be
    built with with_overlaps=True.  The resonance condition picks
    n4 = n1 - n2 + n3, so the quartic term is the pointwise resonant
    contraction of the gathered slice of Q paired against v.
    """
    _require_tensor(field, tensor)
    if tensor.quad_overlaps is None:
        raise ValueError(
            "dcr_energy needs the overlap array: build the tensor with "
            "with_overlaps=True")
    g = field.grid
    kin = 0.5 * float(np.sum(g.k2[:, :, None] * np.abs(field.coeffs) ** 2))
    gathered = ResonantTensor(
        n_max=tensor.n_max,
        values=np.ascontiguousarray(_gather_resonant(tensor.quad_overlaps)))
    c_phys = spectral_to_phys(g, field.coeffs)
    flat = c_phys.reshape(-1, tensor.n_max)
    fq = _kernels.contract_cubic(flat, gathered)
    quart = 0.25 * g.cell_area * float(np.sum((np.conj(flat) * fq).real))
    return kin + quart
