# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled recurrence kernels; same contract as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

cdef double RESCALE = 1e250
cdef double SERIES_CUTOFF = 2.0


def three_term(x, A, B, C):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[::1] Av = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[::1] Bv = np.ascontiguousarray(B, dtype=np.float64)
    cdef double[::1] Cv = np.ascontiguousarray(C, dtype=np.float64)
    cdef Py_ssize_t nmax = Av.shape[0], m = xv.shape[0], i, k
    vals_a = np.empty((nmax + 1, m))
    d1_a = np.empty((nmax + 1, m))
    d2_a = np.empty((nmax + 1, m))
    cdef double[:, ::1] vals = vals_a
    cdef double[:, ::1] d1 = d1_a
    cdef double[:, ::1] d2 = d2_a
    cdef double p, dp, ddp, pm, dpm, ddpm, pn, dpn, ddpn, lin, xi
    for i in range(m):
        xi = xv[i]
        p = 1.0
        dp = 0.0
        ddp = 0.0
        pm = 0.0
        dpm = 0.0
        ddpm = 0.0
        vals[0, i] = p
        d1[0, i] = dp
        d2[0, i] = ddp
        for k in range(nmax):
            lin = Av[k] * xi + Bv[k]
            pn = lin * p - Cv[k] * pm
            dpn = Av[k] * p + lin * dp - Cv[k] * dpm
            ddpn = 2.0 * Av[k] * dp + lin * ddp - Cv[k] * ddpm
            pm = p
            dpm = dp
            ddpm = ddp
            p = pn
            dp = dpn
            ddp = ddpn
            vals[k + 1, i] = p
            d1[k + 1, i] = dp
            d2[k + 1, i] = ddp
    return vals_a, d1_a, d2_a


cdef double _series(double x, int k) nogil:
    cdef double h = 0.5 * x, term = 1.0, total, h2
    cdef int j
    for j in range(1, k + 1):
        term *= h / j
    total = term
    h2 = h * h
    j = 0
    while True:
        j += 1
        term *= -h2 / (j * (j + k))
        total += term
        if fabs(term) <= 1e-17 * fabs(total) or j > 500:
            return total


cdef int _miller_start(double x, int nmax) nogil:
    cdef double big = x if x > nmax else nmax
    cdef double arg = big if big > 1.0 else 1.0
    cdef int m = <int>big + 20 + <int>sqrt(40.0 * arg)
    return m + (m % 2)


cdef void _miller(double x, int nmax, double[:, ::1] out, Py_ssize_t col) nogil:
    cdef int m = _miller_start(x, nmax), k, r
    cdef double jp = 0.0, j = 1e-30, jm, norm = 0.0
    for k in range(m, 0, -1):
        if k <= nmax:
            out[k, col] = j
        if k % 2 == 0:
            norm += 2.0 * j
        jm = (2.0 * k / x) * j - jp
        jp = j
        j = jm
        if fabs(j) > RESCALE:
            j /= RESCALE
            jp /= RESCALE
            norm /= RESCALE
            for r in range(k, nmax + 1):
                out[r, col] /= RESCALE
    out[0, col] = j
    norm += j
    for r in range(nmax + 1):
        out[r, col] /= norm


def bessel_j_seq(x, int nmax):
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t m = xv.shape[0], i
    cdef int k
    out_a = np.empty((nmax + 1, m))
    cdef double[:, ::1] out = out_a
    with nogil:
        for i in range(m):
            if xv[i] >= SERIES_CUTOFF:
                _miller(xv[i], nmax, out, i)
            else:
                for k in range(nmax + 1):
                    out[k, i] = _series(xv[i], k)
    return out_a
