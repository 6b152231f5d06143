# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: cyclic complex Jacobi eigensolver and the fused
ensemble evaluation that dominates the capacity optimizer's runtime."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, log2, sqrt

cnp.import_array()

NAME = "compiled"


cdef double _off_norm(double complex[:, ::1] m, int d) noexcept:
    cdef double s = 0.0
    cdef int i, j
    for i in range(d):
        for j in range(d):
            if i != j:
                s += m[i, j].real * m[i, j].real + m[i, j].imag * m[i, j].imag
    return sqrt(s)


def jacobi_eigh(a, double off_threshold, long max_rotations):
    """Diagonalize a Hermitian matrix with cyclic Jacobi rotations.

    Returns (eigenvalues ascending, eigenvector columns, final off-diagonal
    Frobenius norm).  Raises RuntimeError when the rotation budget runs out
    before the off-diagonal norm drops below the threshold.
    """
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] m = np.array(
        a, dtype=np.complex128, order="C", copy=True)
    cdef int d = m.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] v = np.eye(d, dtype=np.complex128)
    cdef double complex[:, ::1] mm = m
    cdef double complex[:, ::1] vv = v
    cdef long rotations = 0
    cdef int p, q, k
    cdef double off, alpha, delta, absb, tau, t, c, sig, skip
    cdef double complex beta, phase, s, mkp, mkq, vkp, vkq

    off = _off_norm(mm, d)
    skip = off_threshold / (d * d) if d > 1 else 0.0
    while off > off_threshold:
        for p in range(d - 1):
            for q in range(p + 1, d):
                beta = mm[p, q]
                absb = sqrt(beta.real * beta.real + beta.imag * beta.imag)
                if absb <= skip:
                    continue
                if rotations >= max_rotations:
                    raise RuntimeError(
                        "jacobi rotation budget exhausted at off-norm %g" % off)
                rotations += 1
                phase = beta / absb
                alpha = mm[p, p].real
                delta = mm[q, q].real
                tau = (delta - alpha) / (2.0 * absb)
                if tau >= 0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                sig = t * c
                s = sig * phase
                # columns:  M <- M G,  V <- V G
                for k in range(d):
                    mkp = mm[k, p]
                    mkq = mm[k, q]
                    mm[k, p] = c * mkp - s.conjugate() * mkq
                    mm[k, q] = s * mkp + c * mkq
                    vkp = vv[k, p]
                    vkq = vv[k, q]
                    vv[k, p] = c * vkp - s.conjugate() * vkq
                    vv[k, q] = s * vkp + c * vkq
                # rows:  M <- G^H M
                for k in range(d):
                    mkp = mm[p, k]
                    mkq = mm[q, k]
                    mm[p, k] = c * mkp - s * mkq
                    mm[q, k] = s.conjugate() * mkp + c * mkq
        off = _off_norm(mm, d)
    w = np.diagonal(m).real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order], off


def mix_eval(p_arr, sigmas_arr, s_bits_arr, double off_threshold, long max_rotations):
    """chi (bits) and per-output relative entropies for a weighted mixture.

    Returns (chi, D, eigenvalues, eigenvectors) of the mixture
    sum_x p[x] sigmas[x]; D[x] = -s_bits[x] - Tr(sigmas[x] log2 mix).
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p = np.ascontiguousarray(p_arr, dtype=np.float64)
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] sig = np.ascontiguousarray(sigmas_arr, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sb = np.ascontiguousarray(s_bits_arr, dtype=np.float64)
    cdef int n = sig.shape[0]
    cdef int d = sig.shape[1]
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] m = np.zeros((d, d), dtype=np.complex128)
    cdef double complex[:, :, ::1] ss = sig
    cdef double complex[:, ::1] mm = m
    cdef double[::1] pp = p
    cdef int x, i, j, k
    for x in range(n):
        if pp[x] == 0.0:
            continue
        for i in range(d):
            for j in range(d):
                mm[i, j] = mm[i, j] + pp[x] * ss[x, i, j]
    w, v, off = jacobi_eigh(m, off_threshold, max_rotations)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lw = np.empty(d, dtype=np.float64)
    cdef double[::1] ww = w
    cdef double[::1] lww = lw
    for i in range(d):
        lww[i] = log2(ww[i]) if ww[i] > 1e-300 else log2(1e-300)
    # L = V diag(lw) V^H
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] L = np.zeros((d, d), dtype=np.complex128)
    cdef double complex[:, ::1] LL = L
    cdef double complex[:, ::1] vvv = v
    cdef double complex acc
    for i in range(d):
        for j in range(d):
            acc = 0
            for k in range(d):
                acc = acc + vvv[i, k] * lww[k] * vvv[j, k].conjugate()
            LL[i, j] = acc
    cdef cnp.ndarray[cnp.float64_t, ndim=1] D = np.empty(n, dtype=np.float64)
    cdef double[::1] DD = D
    cdef double tr, chi
    for x in range(n):
        tr = 0.0
        for i in range(d):
            for j in range(d):
                tr += (ss[x, i, j] * LL[j, i]).real
        DD[x] = -sb[x] - tr
    chi = 0.0
    for x in range(n):
        chi += pp[x] * DD[x]
    return chi, D, w, v
