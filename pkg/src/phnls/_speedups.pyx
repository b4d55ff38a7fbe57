# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: the resonant cubic contraction over physical
y-points and the direct interaction-Morawetz pair sum."""

cimport openmp
from cython.parallel cimport prange
from libc.math cimport sqrt


def set_num_threads(int k):
    if k > 0:
        openmp.omp_set_num_threads(k)


def contract_cubic(const double complex[:, ::1] c,
                   const double[:, :, ::1] d,
                   double complex[:, ::1] out):
    """out[p, n1-n2+n3] = sum d[n1, n2, n3] c[p, n1] conj(c[p, n2]) c[p, n3].

    c has one row per physical point; d is the dense resonant slice (zero
    where the output index would leave the band), so window bounds on n3
    enumerate exactly the retained terms.
    """
    cdef Py_ssize_t npts = c.shape[0]
    cdef Py_ssize_t nh = c.shape[1]
    cdef Py_ssize_t p, n1, n2, n3, lo, hi, base
    cdef double complex a
    for p in prange(npts, nogil=True, schedule="static"):
        for n3 in range(nh):
            out[p, n3] = 0
        for n1 in range(nh):
            for n2 in range(nh):
                a = c[p, n1] * c[p, n2].conjugate()
                base = n1 - n2
                lo = -base if base < 0 else 0
                hi = nh - base if base > 0 else nh
                for n3 in range(lo, hi):
                    out[p, base + n3] = out[p, base + n3] \
                        + d[n1, n2, n3] * a * c[p, n3]


def morawetz_pairs(const double[:, ::1] rho,
                   const double[:, ::1] j1,
                   const double[:, ::1] j2,
                   double box_len):
    """sum over grid pairs of rho(yt) * unit(y - yt) . J(y), minimal image.

    unit() is the minimal-image direction vector; it vanishes at coincident
    points, and a component at exactly half-box separation is zeroed (the
    two images tie), which keeps the kernel odd on the discrete torus.
    Cell-area weights are the caller's business.
    """
    cdef Py_ssize_t n = rho.shape[0]
    cdef double dy = box_len / n
    cdef Py_ssize_t half = n // 2
    cdef Py_ssize_t a, a1, a2, b1, b2, d1, d2
    cdef double z1, z2, r, row
    cdef double total = 0.0
    for a in prange(n * n, nogil=True, schedule="static"):
        a1 = a // n
        a2 = a % n
        row = 0.0
        for b1 in range(n):
            d1 = a1 - b1
            if d1 > half:
                d1 = d1 - n
            elif d1 < -half:
                d1 = d1 + n
            z1 = 0.0 if (d1 == half or d1 == -half) else d1 * dy
            for b2 in range(n):
                d2 = a2 - b2
                if d2 > half:
                    d2 = d2 - n
                elif d2 < -half:
                    d2 = d2 + n
                z2 = 0.0 if (d2 == half or d2 == -half) else d2 * dy
                r = sqrt(z1 * z1 + z2 * z2)
                if r > 0.0:
                    row = row + rho[b1, b2] * (z1 * j1[a1, a2]
                                               + z2 * j2[a1, a2]) / r
        total += row
    return total
