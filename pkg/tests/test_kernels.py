"""Compiled and numpy kernels against brute-force oracles."""

import numpy as np
import pytest

from phnls import _kernels, _kernels_np, hermite, tensor


@pytest.fixture(scope="module")
def t12():
    rule = hermite.build_quadrature(48, 12)
    return tensor.compute_tensor(12, rule)


def _contract_reference(c, t):
    """Direct resonant sum with explicit index bookkeeping."""
    nh = t.n_max
    out = np.zeros_like(c)
    for n1 in range(nh):
        for n2 in range(nh):
            for n3 in range(nh):
                n4 = n1 - n2 + n3
                if 0 <= n4 < nh:
                    out[:, n4] += (t.values[n1, n2, n3] * c[:, n1]
                                   * np.conj(c[:, n2]) * c[:, n3])
    return out


def test_contract_matches_reference(t12):
    rng = np.random.default_rng(11)
    c = rng.standard_normal((17, 12)) + 1j * rng.standard_normal((17, 12))
    want = _contract_reference(c, t12)
    got = _kernels.contract_cubic(c, t12)
    assert np.abs(got - want).max() < 1e-12
    got_np = _kernels_np.contract_cubic(c, t12.np_blocks())
    assert np.abs(got_np - want).max() < 1e-12


@pytest.mark.skipif(not _kernels.HAVE_EXT, reason="extension not built")
def test_contract_ext_vs_numpy(t12):
    rng = np.random.default_rng(12)
    c = rng.standard_normal((64, 12)) + 1j * rng.standard_normal((64, 12))
    ext = _kernels.contract_cubic(c, t12)
    fallback = _kernels_np.contract_cubic(np.ascontiguousarray(c), t12.np_blocks())
    assert np.abs(ext - fallback).max() < 1e-12


def test_contract_single_mode_closed_form(t12):
    # c = a e_n: only (n, n, n) survives, out = D[n,n,n,n] |a|^2 a e_n
    for n in (0, 3, 11):
        c = np.zeros((1, 12), dtype=complex)
        a = 0.7 - 0.4j
        c[0, n] = a
        out = _kernels.contract_cubic(c, t12)
        want = t12.values[n, n, n] * abs(a) ** 2 * a
        assert abs(out[0, n] - want) < 1e-15
        mask = np.ones(12, bool)
        mask[n] = False
        assert np.abs(out[0, mask]).max() == 0.0


def test_contract_phase_covariance(t12):
    # c_n -> e^{-i(2n+1)t} c_n maps the output the same way: the resonant
    # combination n1 - n2 + n3 carries phase e^{-i(2 n4 + 1)t}
    rng = np.random.default_rng(13)
    c = rng.standard_normal((5, 12)) + 1j * rng.standard_normal((5, 12))
    t_val = 0.83
    ph = np.exp(-1j * (2 * np.arange(12) + 1) * t_val)
    lhs = _kernels.contract_cubic(c * ph, t12)
    rhs = _kernels.contract_cubic(c, t12) * ph
    assert np.abs(lhs - rhs).max() < 1e-13


def test_pair_sum_fft_vs_direct():
    rng = np.random.default_rng(14)
    for n, box in ((8, 4.0), (16, 8.0), (12, 6.0)):
        rho = rng.standard_normal((n, n)) ** 2
        j1 = rng.standard_normal((n, n))
        j2 = rng.standard_normal((n, n))
        fft_val = _kernels.morawetz_pair_sum(rho, j1, j2, box)
        direct = _kernels_np.morawetz_pairs_direct(rho, j1, j2, box)
        assert abs(fft_val - direct) < 1e-10 * max(1.0, abs(direct))


@pytest.mark.skipif(not _kernels.HAVE_EXT, reason="extension not built")
def test_pair_sum_ext_vs_fft():
    rng = np.random.default_rng(15)
    n = 20
    rho = rng.standard_normal((n, n)) ** 2
    j1 = rng.standard_normal((n, n))
    j2 = rng.standard_normal((n, n))
    ext = _kernels.morawetz_pair_sum_direct(rho, j1, j2, 10.0)
    fft_val = _kernels.morawetz_pair_sum(rho, j1, j2, 10.0)
    assert abs(ext - fft_val) < 1e-10 * max(1.0, abs(fft_val))


def test_pair_sum_odd_kernel_kills_proportional_current():
    # J = xi * rho pointwise: sum_{a,b} rho(a) rho(b) K(a-b) . xi = 0
    # exactly, because K is odd (half-box ties zeroed) and rho x rho is
    # symmetric under swapping the pair.
    rng = np.random.default_rng(16)
    n = 16
    rho = rng.standard_normal((n, n)) ** 2
    for xi in ((1.0, 0.0), (0.0, -2.0), (0.75, 0.5)):
        val = _kernels.morawetz_pair_sum(rho, xi[0] * rho, xi[1] * rho, 8.0)
        assert abs(val) < 1e-10 * np.sum(rho) ** 2


def test_direction_kernel_antisymmetry():
    for n in (8, 10, 16):
        k1, k2 = _kernels_np._direction_kernels(n, 5.0)
        idx = (-np.arange(n)) % n
        assert np.abs(k1 + k1[np.ix_(idx, idx)]).max() == 0.0
        assert np.abs(k2 + k2[np.ix_(idx, idx)]).max() == 0.0
        # unit magnitude away from the zeroed rows/columns
        r = np.hypot(k1, k2)
        assert np.all((np.abs(r - 1) < 1e-14) | (r < 1e-14))
