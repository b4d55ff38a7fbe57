"""Discrete state: periodic Fourier lattice in the two free directions,
Hermite levels in the trapped direction.

A field u(y, x) with y on the square torus of side L and x on the line is
stored through its mixed coefficients

    coeffs[k1, k2, n] = < u , e^{i k . y} h_n(x) / L >_{L^2},

so that mass(u) = sum |coeffs|^2 exactly.  Physical Hermite-coefficient
values c_n(y_j) relate to the stored array by the unitary pair

    c_phys = ifft2(coeffs) * n_y^2 / L,      coeffs = fft2(c_phys) * L / n_y^2.

Grid coordinates use the FFT layout (index 0 at y = 0, negative half second),
so samplers see points in [-L/2, L/2)^2.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import hermite
from .hermite import HermiteRule

DEFAULT_EPS0 = 0.25

SNAPSHOT_MAGIC = b"PHN1"
_SNAP_HEADER = struct.Struct("<4sIIIIdd")  # magic, version, n_y, n_h, count, L, t


@dataclass(frozen=True)
class Grid:
    """Immutable discretization: n_y x n_y Fourier lattice on a box of side
    box_len, n_h Hermite levels sampled by `rule`, plus derived tables."""

    n_y: int
    box_len: float
    n_h: int
    rule: HermiteRule
    ky: np.ndarray            # angular wavenumbers along one axis
    k2: np.ndarray            # |k|^2 on the full lattice
    dealias_mask: np.ndarray  # two-thirds rule, per axis
    scaled_basis: np.ndarray  # basis at nodes/sqrt(2), for quartic pairings
    scaled_weights: np.ndarray
    cell_area: float

    @property
    def quad_count(self) -> int:
        return self.rule.count

    def coords(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(y1, y2, x) sample coordinates; y in FFT layout."""
        dy = self.box_len / self.n_y
        y = dy * np.arange(self.n_y)
        y[y >= self.box_len / 2] -= self.box_len
        return y, y.copy(), self.rule.nodes


def make_grid(n_y: int, box_len: float, n_h: int,
              quad_count: int | None = None,
              rule: HermiteRule | None = None) -> Grid:
    """Validate and assemble a Grid.  quad_count defaults to 2 * n_h, the
    smallest size that keeps cubic-term projections exact."""
    if n_y < 4 or (n_y & (n_y - 1)) != 0:
        raise ValueError(f"n_y must be a power of two >= 4, got {n_y}")
    if not box_len > 0:
        raise ValueError(f"box_len must be positive, got {box_len}")
    if n_h < 1:
        raise ValueError(f"n_h must be at least 1, got {n_h}")

    if rule is None:
        count = 2 * n_h if quad_count is None else quad_count
        if count < 2 * n_h:
            raise ValueError(
                f"quad_count must be at least {2 * n_h} for n_h={n_h}, "
                f"got {count}")
        rule = hermite.build_quadrature(count, n_h)
    else:
        if rule.n_h < n_h:
            raise ValueError(
                f"rule carries {rule.n_h} basis functions, need {n_h}")
        if rule.count < 2 * n_h:
            raise ValueError(
                f"quad_count must be at least {2 * n_h} for n_h={n_h}, "
                f"got {rule.count}")

    m = np.fft.fftfreq(n_y, 1.0 / n_y).astype(int)
    ky = 2.0 * np.pi * m / box_len
    k2 = ky[:, None] ** 2 + ky[None, :] ** 2
    keep = np.abs(m) <= n_y // 3
    mask = keep[:, None] & keep[None, :]
    sb, sw = hermite.quartic_sampling(rule, n_h)
    for arr in (ky, k2, mask, sb, sw):
        arr.flags.writeable = False
    return Grid(n_y=n_y, box_len=float(box_len), n_h=n_h, rule=rule,
                ky=ky, k2=k2, dealias_mask=mask, scaled_basis=sb,
                scaled_weights=sw, cell_area=(box_len / n_y) ** 2)


@dataclass
class Field:
    """Mixed Fourier-Hermite coefficients at a single time."""

    grid: Grid
    coeffs: np.ndarray  # (n_y, n_y, n_h) complex128
    time: float = 0.0

    def copy(self) -> "Field":
        return Field(grid=self.grid, coeffs=self.coeffs.copy(),
                     time=self.time)


def zeros_field(grid: Grid, time: float = 0.0) -> Field:
    return Field(grid=grid,
                 coeffs=np.zeros((grid.n_y, grid.n_y, grid.n_h),
                                 dtype=np.complex128),
                 time=time)


def _check_coeffs(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    want = (grid.n_y, grid.n_y, grid.n_h)
    if coeffs.shape != want:
        raise ValueError(f"coeffs shape {coeffs.shape} does not match grid "
                         f"{want}")
    return coeffs


def field_from_coeffs(grid: Grid, coeffs: np.ndarray,
                      time: float = 0.0) -> Field:
    return Field(grid=grid, coeffs=_check_coeffs(grid, coeffs), time=time)


def spectral_to_phys(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    """Hermite-coefficient values c_n(y_j), shape (n_y, n_y, n_h)."""
    return np.fft.ifft2(coeffs, axes=(0, 1)) * (grid.n_y ** 2 / grid.box_len)


def phys_to_spectral(grid: Grid, c_phys: np.ndarray) -> np.ndarray:
    return np.fft.fft2(c_phys, axes=(0, 1)) * (grid.box_len / grid.n_y ** 2)


def to_physical(field: Field) -> np.ndarray:
    """Point values u(y1, y2, x_m) on the collocation grid,
    shape (n_y, n_y, count)."""
    c_phys = spectral_to_phys(field.grid, field.coeffs)
    return c_phys @ field.grid.rule.basis.T


def from_samples(grid: Grid, samples: np.ndarray, time: float = 0.0) -> Field:
    """Project point values on the collocation grid onto the basis."""
    samples = np.asarray(samples, dtype=np.complex128)
    want = (grid.n_y, grid.n_y, grid.rule.count)
    if samples.shape != want:
        raise ValueError(f"samples shape {samples.shape} does not match "
                         f"collocation grid {want}")
    c_phys = (samples * grid.rule.wexp) @ grid.rule.basis
    return Field(grid=grid, coeffs=phys_to_spectral(grid, c_phys), time=time)


def from_sampler(grid: Grid, f, time: float = 0.0) -> Field:
    """Sample the callable f(y1, y2, x) on the collocation grid and project.

    Exact (to roundoff) for band-limited data: trigonometric degree below the
    lattice Nyquist in y, Hermite content inside the first n_h levels in x.
    """
    y1, y2, x = grid.coords()
    vals = f(y1[:, None, None], y2[None, :, None], x[None, None, :])
    vals = np.broadcast_to(np.asarray(vals, dtype=np.complex128),
                           (grid.n_y, grid.n_y, grid.rule.count))
    return from_samples(grid, vals, time=time)


def dealias(field: Field) -> Field:
    out = field.coeffs * field.grid.dealias_mask[:, :, None]
    return Field(grid=field.grid, coeffs=out, time=field.time)


# ---------------------------------------------------------------------------
# norms and functionals

def mass(field: Field) -> float:
    """L^2 mass int |u|^2; exactly sum |coeffs|^2 in this normalization."""
    return float(np.vdot(field.coeffs, field.coeffs).real)


def kinetic_e0(field: Field) -> float:
    """E_0 = sum_n (2n+1) ||c_n||_{L^2_y}^2, the trapped-direction energy."""
    lam = 2.0 * np.arange(field.grid.n_h) + 1.0
    return float(np.sum(lam * np.sum(np.abs(field.coeffs) ** 2, axis=(0, 1))))


def l2h1_norm(field: Field) -> float:
    """Mixed norm L^2_y H^1_x (harmonic H^1 in the trapped direction)."""
    return float(np.sqrt(kinetic_e0(field)))


def hs_mixed_norm(field: Field, s: float) -> float:
    """( sum (1 + |k|^2 + 2n+1)^s |coeffs|^2 )^(1/2); s=1 is the Sigma norm."""
    lam = 2.0 * np.arange(field.grid.n_h) + 1.0
    weight = (1.0 + field.grid.k2[:, :, None] + lam) ** s
    return float(np.sqrt(np.sum(weight * np.abs(field.coeffs) ** 2)))


def sigma_norm(field: Field) -> float:
    """Energy-space norm: full gradient plus harmonic confinement plus mass."""
    return hs_mixed_norm(field, 1.0)


def l4_y_integrand(field: Field) -> float:
    """int_y ( int_x |u|^2 dx )^2 dy, the spatial part of the L^4 monitor.

    The inner integral is the exact Hermite Parseval sum, so this quantity is
    computed identically for the full and the resonant system.
    """
    c_phys = spectral_to_phys(field.grid, field.coeffs)
    rho = np.sum(np.abs(c_phys) ** 2, axis=2)
    return float(field.grid.cell_area * np.sum(rho ** 2))


def _quartic_integral(field: Field) -> float:
    """int |u|^4 over the slab, exact through the scaled product rule."""
    g = field.grid
    c_phys = spectral_to_phys(g, field.coeffs)
    u_s = c_phys @ g.scaled_basis.T
    dens = (u_s.real ** 2 + u_s.imag ** 2) ** 2
    return float(g.cell_area * np.sum(dens @ g.scaled_weights))


def energy_pnls(field: Field) -> float:
    """Conserved energy of the confined cubic flow:
    (1/2) sum (|k|^2 + 2n+1) |coeffs|^2 + (1/4) int |u|^4."""
    g = field.grid
    lam = 2.0 * np.arange(g.n_h) + 1.0
    quad = np.sum((g.k2[:, :, None] + lam) * np.abs(field.coeffs) ** 2)
    return float(0.5 * quad + 0.25 * _quartic_integral(field))


@dataclass(frozen=True)
class NormReport:
    """Bundle of the standard monitors at one instant."""

    mass: float
    energy: float
    sigma: float
    l2h1: float
    kinetic_e0: float
    l4_integrand: float
    eps0: float = DEFAULT_EPS0


def norm_report(field: Field, energy: float | None = None,
                eps0: float = DEFAULT_EPS0) -> NormReport:
    """Assemble a NormReport; energy defaults to the confined-flow energy
    (pass dcr_energy(...) for resonant runs)."""
    if not 0.0 < eps0 < 0.5:
        raise ValueError(f"eps0 must lie in (0, 1/2), got {eps0}")
    e0 = kinetic_e0(field)
    return NormReport(
        mass=mass(field),
        energy=energy_pnls(field) if energy is None else float(energy),
        sigma=sigma_norm(field),
        l2h1=float(np.sqrt(e0)),
        kinetic_e0=e0,
        l4_integrand=l4_y_integrand(field),
        eps0=eps0,
    )


@dataclass(frozen=True)
class DiagnosticRecord:
    """One diagnostics emission from a simulation loop."""

    step: int
    time: float
    report: NormReport
    morawetz: float
    halfderiv: float
    field: Field


# ---------------------------------------------------------------------------
# snapshots

def save_snapshot(field: Field, path) -> None:
    """Write the field to `path`.

    Layout: little-endian header (magic 'PHN1', version u32, n_y u32, n_h
    u32, quad_count u32, box_len f64, time f64) followed by the coefficient
    array as C-ordered complex128 bytes.  The round trip is byte-identical.
    """
    header = _SNAP_HEADER.pack(SNAPSHOT_MAGIC, 1, field.grid.n_y,
                               field.grid.n_h, field.grid.quad_count,
                               field.grid.box_len, field.time)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(field.coeffs,
                                      dtype=np.complex128).tobytes())


def load_snapshot(path) -> Field:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _SNAP_HEADER.size:
        raise ValueError(f"snapshot {path} truncated")
    magic, version, n_y, n_h, count, box_len, time = _SNAP_HEADER.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC or version != 1:
        raise ValueError(f"snapshot {path} has unknown format "
                         f"(magic={magic!r}, version={version})")
    body = raw[_SNAP_HEADER.size:]
    want = n_y * n_y * n_h * 16
    if len(body) != want:
        raise ValueError(f"snapshot {path}: expected {want} payload bytes, "
                         f"found {len(body)}")
    grid = make_grid(n_y, box_len, n_h, quad_count=count)
    coeffs = np.frombuffer(body, dtype=np.complex128).reshape(n_y, n_y, n_h)
    return Field(grid=grid, coeffs=coeffs.copy(), time=time)
