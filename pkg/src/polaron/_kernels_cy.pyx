# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Cython backend for the variational energy/gradient kernel.

Same contract as polaron._kernels_py.energy_norm_gradient; the double sum
over coherent-state pairs and bath modes is the hot loop of the whole
solver, so it is written with explicit typed loops.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()

BACKEND_NAME = "cython"

# exponents below this underflow to zero anyway; skip the exp call
cdef double EXP_FLOOR = -745.0


def energy_norm_gradient(double delta, omega, g, C, F):
    """Energy, squared norm, and analytic gradient (Cython implementation)."""
    cdef const double[::1] w = np.ascontiguousarray(omega, dtype=np.float64)
    cdef const double[::1] gk = np.ascontiguousarray(g, dtype=np.float64)
    cdef const double[::1] c = np.ascontiguousarray(C, dtype=np.float64)
    cdef const double[:, ::1] f = np.ascontiguousarray(F, dtype=np.float64)

    cdef Py_ssize_t N = c.shape[0]
    cdef Py_ssize_t M = w.shape[0]

    cdef cnp.ndarray[cnp.float64_t, ndim=2] Km = np.empty((N, N))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Kp = np.empty((N, N))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] B = np.empty((N, N))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] grad_C = np.zeros(N)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] grad_F = np.zeros((N, M))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w1 = np.empty(N)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w2 = np.empty(N)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w3 = np.empty(N)

    cdef double[:, ::1] km = Km
    cdef double[:, ::1] kp = Kp
    cdef double[:, ::1] b = B
    cdef double[::1] gc = grad_C
    cdef double[:, ::1] gf = grad_F
    cdef double[::1] v1 = w1
    cdef double[::1] v2 = w2
    cdef double[::1] v3 = w3

    cdef Py_ssize_t n, m, k
    cdef double d2, s2, bb, diff, summ, cc, kme, kpe
    cdef double H = 0.0, norm = 0.0, energy
    cdef double dh_c, dn_c, r1, r2, r3, a1, a2, a3, a4, dh, dn

    for n in range(N):
        for m in range(n, N):
            d2 = 0.0
            s2 = 0.0
            bb = 0.0
            for k in range(M):
                diff = f[n, k] - f[m, k]
                summ = f[n, k] + f[m, k]
                d2 += diff * diff
                s2 += summ * summ
                bb += 2.0 * w[k] * f[n, k] * f[m, k] - gk[k] * summ
            kme = exp(-0.5 * d2) if -0.5 * d2 > EXP_FLOOR else 0.0
            kpe = exp(-0.5 * s2) if -0.5 * s2 > EXP_FLOOR else 0.0
            km[n, m] = kme
            km[m, n] = kme
            kp[n, m] = kpe
            kp[m, n] = kpe
            b[n, m] = bb
            b[m, n] = bb
            cc = c[n] * c[m] if n == m else 2.0 * c[n] * c[m]
            H += cc * (-delta * kpe + kme * bb)
            norm += 2.0 * cc * kme

    if norm < 1e-12:
        return np.nan, norm, grad_C, grad_F
    energy = H / norm

    for n in range(N):
        dh_c = 0.0
        dn_c = 0.0
        r1 = 0.0
        r2 = 0.0
        r3 = 0.0
        for m in range(N):
            dh_c += c[m] * (-delta * kp[n, m] + km[n, m] * b[n, m])
            dn_c += c[m] * km[n, m]
            v1[m] = c[n] * c[m] * kp[n, m]
            v2[m] = c[n] * c[m] * km[n, m]
            v3[m] = v2[m] * b[n, m]
            r1 += v1[m]
            r2 += v2[m]
            r3 += v3[m]
        gc[n] = (2.0 * dh_c - energy * 4.0 * dn_c) / norm
        for k in range(M):
            a1 = 0.0  # sum_m W1_nm f_mk
            a2 = 0.0  # sum_m W2_nm f_mk
            a3 = 0.0  # sum_m W3_nm f_mk
            for m in range(N):
                a1 += v1[m] * f[m, k]
                a2 += v2[m] * f[m, k]
                a3 += v3[m] * f[m, k]
            dh = 2.0 * (
                delta * (r1 * f[n, k] + a1)
                + 2.0 * a2 * w[k]
                - r2 * gk[k]
                - (r3 * f[n, k] - a3)
            )
            dn = -4.0 * (r2 * f[n, k] - a2)
            gf[n, k] = (dh - energy * dn) / norm

    return energy, norm, grad_C, grad_F
