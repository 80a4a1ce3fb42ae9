# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled cyclic Jacobi eigensolver for complex Hermitian matrices.

Same sweep order and rotation formulas as :mod:`petzlab._jacobi_py`.
"""

import numpy as np

from libc.math cimport sqrt, fabs


cdef extern from "complex.h":
    double cabs(double complex)
    double complex conj(double complex)
    double creal(double complex)


cdef double _off_norm(double complex[:, ::1] a, Py_ssize_t n):
    cdef Py_ssize_t i, j
    cdef double s = 0.0, r
    for i in range(n):
        for j in range(i + 1, n):
            r = cabs(a[i, j])
            s += r * r
    return sqrt(2.0 * s)


def jacobi_eigh(a_in, double tol=1e-15, int max_sweeps=100):
    """Diagonalize a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(w, v, sweeps, off)``; see the pure-Python twin for details.
    """
    cdef double complex[:, ::1] a = np.array(a_in, dtype=np.complex128, order="C")
    cdef Py_ssize_t n = a.shape[0]
    v_arr = np.eye(n, dtype=np.complex128)
    cdef double complex[:, ::1] v = v_arr
    cdef Py_ssize_t p, q, k
    cdef int sweep
    cdef double scale = 0.0, threshold, off, r, theta, t, c, s, app, aqq
    cdef double complex apq, phase, pc, xp, xq

    for p in range(n):
        for q in range(n):
            r = cabs(a[p, q])
            scale += r * r
    threshold = tol * sqrt(scale)
    off = _off_norm(a, n)
    w = np.empty(n, dtype=np.float64)
    if off <= threshold or n < 2:
        for p in range(n):
            w[p] = creal(a[p, p])
        return w, v_arr, 0, off

    for sweep in range(1, max_sweeps + 1):
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = cabs(apq)
                if r == 0.0:
                    continue
                app = creal(a[p, p])
                aqq = creal(a[q, q])
                if r < 1e-300 or (
                    fabs(app) + 1e3 * r == fabs(app)
                    and fabs(aqq) + 1e3 * r == fabs(aqq)
                    and sweep > 3
                ):
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    continue
                phase = apq / r
                theta = (aqq - app) / (2.0 * r)
                t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                pc = conj(phase)
                for k in range(n):
                    xp = a[k, p]
                    xq = a[k, q]
                    a[k, p] = c * xp - s * pc * xq
                    a[k, q] = s * xp + c * pc * xq
                for k in range(n):
                    xp = a[p, k]
                    xq = a[q, k]
                    a[p, k] = c * xp - s * phase * xq
                    a[q, k] = s * xp + c * phase * xq
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = creal(a[p, p])
                a[q, q] = creal(a[q, q])
                for k in range(n):
                    xp = v[k, p]
                    xq = v[k, q]
                    v[k, p] = c * xp - s * pc * xq
                    v[k, q] = s * xp + c * pc * xq
        off = _off_norm(a, n)
        if off <= threshold:
            for p in range(n):
                w[p] = creal(a[p, p])
            return w, v_arr, sweep, off
    for p in range(n):
        w[p] = creal(a[p, p])
    return w, v_arr, max_sweeps + 1, off
