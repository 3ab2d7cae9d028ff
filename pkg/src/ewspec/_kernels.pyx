# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled spectrum kernels.

The phase exp(i nu h j) is advanced by complex multiplication and reset from
sin/cos every RESYNC steps, which keeps the drift below 1e-13 for grids of
10^6 points. The omega loop runs in parallel; each omega owns its accumulator.
Wide Gram factors go through a phase block filled the same way and a BLAS
product, which beats the scalar loop once the factor has more than a few
columns.
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport cos, sin
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef enum:
    RESYNC = 256
    NARROW = 8
    BLOCK_ENTRIES = 1 << 22


cdef void _fill_phases(double complex[:, ::1] E, double[::1] weights, double[::1] nus,
                       Py_ssize_t lo, double h) noexcept nogil:
    cdef Py_ssize_t p, j, P = E.shape[0], M = E.shape[1]
    cdef double complex z, ph
    cdef double ang
    for p in prange(P, schedule="static"):
        z = cos(nus[lo + p] * h) + 1j * sin(nus[lo + p] * h)
        ph = 1
        for j in range(M):
            if j % RESYNC == 0:
                ang = nus[lo + p] * h * j
                ph = cos(ang) + 1j * sin(ang)
            E[p, j] = weights[j] * ph
            ph = ph * z


def _gram_blocked(double complex[:, ::1] F, double[::1] weights, double[::1] nus, double h):
    cdef Py_ssize_t M = F.shape[0], P = nus.shape[0]
    cdef Py_ssize_t step = max(1, BLOCK_ENTRIES // max(M, 1)), lo, hi
    out = np.empty(P)
    Fa = np.asarray(F)
    for lo in range(0, P, step):
        hi = min(P, lo + step)
        E = np.empty((hi - lo, M), dtype=complex)
        _fill_phases(E, weights, nus, lo, h)
        V = E @ Fa
        out[lo:hi] = np.sum(V.real ** 2 + V.imag ** 2, axis=1)
    return out


def gram_spectrum(double complex[:, ::1] F, double[::1] weights, double[::1] nus, double h):
    cdef Py_ssize_t M = F.shape[0], R = F.shape[1], P = nus.shape[0]
    cdef Py_ssize_t p, j, r
    cdef double[::1] out = np.empty(P)
    cdef double complex z, ph, u
    cdef double complex *acc
    cdef double total, ang
    if weights.shape[0] != M:
        raise ValueError("weights and factor rows differ")
    if R > NARROW:
        return _gram_blocked(F, weights, nus, h)
    for p in prange(P, nogil=True, schedule="static"):
        acc = <double complex *> malloc(R * sizeof(double complex))
        for r in range(R):
            acc[r] = 0
        z = cos(nus[p] * h) + 1j * sin(nus[p] * h)
        ph = 1
        for j in range(M):
            if j % RESYNC == 0:
                ang = nus[p] * h * j
                ph = cos(ang) + 1j * sin(ang)
            u = weights[j] * ph
            for r in range(R):
                acc[r] = acc[r] + u * F[j, r]
            ph = ph * z
        total = 0
        for r in range(R):
            total = total + acc[r].real * acc[r].real + acc[r].imag * acc[r].imag
        out[p] = total
        free(acc)
    return np.asarray(out)


def double_sum_spectrum(double complex[:, ::1] G, double[::1] weights, double[::1] nus, double h):
    cdef Py_ssize_t M = G.shape[0], P = nus.shape[0]
    cdef Py_ssize_t p, j, k
    cdef double[::1] out = np.empty(P)
    cdef double complex *u
    cdef double complex z, ph, row
    cdef double total, ang
    if G.shape[1] != M or weights.shape[0] != M:
        raise ValueError("kernel must be square and match the weights")
    for p in prange(P, nogil=True, schedule="static"):
        u = <double complex *> malloc(M * sizeof(double complex))
        z = cos(nus[p] * h) + 1j * sin(nus[p] * h)
        ph = 1
        for j in range(M):
            if j % RESYNC == 0:
                ang = nus[p] * h * j
                ph = cos(ang) + 1j * sin(ang)
            u[j] = weights[j] * ph
            ph = ph * z
        total = 0
        for j in range(M):
            # diagonal plus twice the upper triangle of a Hermitian form
            row = 0
            for k in range(j + 1, M):
                row = row + G[j, k] * u[k]
            total = total + (u[j].real * u[j].real + u[j].imag * u[j].imag) * G[j, j].real
            total = total + 2 * (u[j].real * row.real + u[j].imag * row.imag)
        out[p] = total
        free(u)
    return np.asarray(out)
