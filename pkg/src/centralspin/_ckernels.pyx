# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled per-level sums for the reduced map and its time derivative.

Mirrors ``centralspin._pykernels.evaluate`` term for term, including the
summation order, so both backends agree to rounding.
"""
import numpy as np

from libc.math cimport sin, cos, fabs


cdef inline void _acc(double* s, double* c, double x) noexcept nogil:
    # Neumaier compensated summation
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


def evaluate(
    const double[::1] times,
    const double[::1] eta,
    const double[::1] eta_p,
    const double[::1] amp_a,
    const double[::1] amp_b,
    const double[::1] weight,
    const double[::1] ratio_a,
    const double[::1] ratio_b,
    double branch,
    bint derivatives,
):
    cdef Py_ssize_t m = times.shape[0]
    cdef Py_ssize_t nl = eta.shape[0]
    cdef Py_ssize_t nout = 8 if derivatives else 4
    out_arr = np.zeros((nout, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double s[8]
    cdef double c[8]
    cdef Py_ssize_t i, j, k
    cdef double t, e1, e2, x1, x2, s1, c1, s2, c2, a, b, w
    cdef double h1, h2, ha, hb, pre, pim, dre, dim

    with nogil:
        for i in range(m):
            t = times[i]
            for k in range(8):
                s[k] = 0.0
                c[k] = 0.0
            for j in range(nl):
                e1 = eta[j]
                e2 = eta_p[j]
                x1 = 0.5 * e1 * t
                x2 = 0.5 * e2 * t
                s1 = sin(x1)
                c1 = cos(x1)
                s2 = sin(x2)
                c2 = cos(x2)
                a = ratio_a[j]
                b = ratio_b[j]
                w = weight[j]

                if e1 > 0.0:
                    _acc(&s[0], &c[0], amp_a[j] * s1 * s1 / (e1 * e1))
                else:
                    _acc(&s[0], &c[0], amp_a[j] * 0.25 * t * t)
                if e2 > 0.0:
                    _acc(&s[1], &c[1], amp_b[j] * s2 * s2 / (e2 * e2))
                else:
                    _acc(&s[1], &c[1], amp_b[j] * 0.25 * t * t)

                pre = c1 * c2 + branch * a * b * s1 * s2
                pim = branch * b * c1 * s2 - a * s1 * c2
                _acc(&s[2], &c[2], w * pre)
                _acc(&s[3], &c[3], w * pim)

                if derivatives:
                    if e1 > 0.0:
                        _acc(&s[4], &c[4], amp_a[j] * s1 * c1 / e1)
                    else:
                        _acc(&s[4], &c[4], amp_a[j] * 0.5 * t)
                    if e2 > 0.0:
                        _acc(&s[5], &c[5], amp_b[j] * s2 * c2 / e2)
                    else:
                        _acc(&s[5], &c[5], amp_b[j] * 0.5 * t)
                    h1 = 0.5 * e1
                    h2 = 0.5 * e2
                    ha = a * h1
                    hb = b * h2
                    dre = (-h1 * s1 * c2 + branch * ha * b * c1 * s2
                           - h2 * c1 * s2 + branch * a * hb * s1 * c2)
                    dim = (-branch * h1 * b * s1 * s2 - ha * c1 * c2
                           + branch * hb * c1 * c2 + a * h2 * s1 * s2)
                    _acc(&s[6], &c[6], w * dre)
                    _acc(&s[7], &c[7], w * dim)

            for k in range(nout):
                out[k, i] = s[k] + c[k]
    return out_arr
