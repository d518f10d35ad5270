# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled summation kernels.

Straight loops in a fixed order; the compiled path avoids allocating the
(points x nodes) intermediate arrays that the numpy path needs.
"""
import numpy as np
from libc.math cimport cos, sin, cosh, exp, fabs

def trig_sum(r, t, w):
    cdef const double[::1] rv = np.ascontiguousarray(r, dtype=np.float64)
    cdef const double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    wc = np.ascontiguousarray(w, dtype=np.complex128)
    cdef const double[::1] wr = np.ascontiguousarray(wc.real)
    cdef const double[::1] wi = np.ascontiguousarray(wc.imag)
    cdef Py_ssize_t na = rv.shape[0], nk = tv.shape[0], a, k
    out = np.empty(na, dtype=np.complex128)
    cdef double[::1] ore = np.empty(na), oim = np.empty(na)
    cdef double sr, si, ph, c, s
    for a in range(na):
        sr = 0.0
        si = 0.0
        for k in range(nk):
            ph = tv[k] * rv[a]
            c = cos(ph)
            s = sin(ph)
            sr += wr[k] * c - wi[k] * s
            si += wr[k] * s + wi[k] * c
        ore[a] = sr
        oim[a] = si
    out.real = np.asarray(ore)
    out.imag = np.asarray(oim)
    return out

def sech_sum(r, t, w):
    cdef const double[::1] rv = np.ascontiguousarray(r, dtype=np.float64)
    cdef const double[::1] tv = np.ascontiguousarray(t, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t na = rv.shape[0], nk = tv.shape[0], a, k
    out = np.empty(na, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double acc, ep, em
    # sech((r - t)/2) = 2 / (e^{r/2} e^{-t/2} + e^{-r/2} e^{t/2}); exponentials hoisted
    # out of the loop while every half-argument stays far from overflow
    cdef double big = 0.0
    for k in range(nk):
        big = max(big, fabs(tv[k]))
    for a in range(na):
        big = max(big, fabs(rv[a]))
    if big > 600.0:
        for a in range(na):
            acc = 0.0
            for k in range(nk):
                acc += wv[k] / cosh(0.5 * (rv[a] - tv[k]))
            ov[a] = acc
        return out
    cdef double[::1] tp = np.exp(0.5 * np.asarray(tv))
    cdef double[::1] tm = np.exp(-0.5 * np.asarray(tv))
    for a in range(na):
        ep = exp(0.5 * rv[a])
        em = exp(-0.5 * rv[a])
        acc = 0.0
        for k in range(nk):
            acc += wv[k] * 2.0 / (ep * tm[k] + em * tp[k])
        ov[a] = acc
    return out

def resolvent_sum(lam, s, w):
    cdef const double[::1] lv = np.ascontiguousarray(lam, dtype=np.float64)
    cdef const double[::1] sv = np.ascontiguousarray(s, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t na = lv.shape[0], nk = sv.shape[0], a, k
    out = np.empty(na, dtype=np.float64)
    cdef double[::1] ov = out
    cdef double acc
    for a in range(na):
        acc = 0.0
        for k in range(nk):
            acc += wv[k] / (lv[a] + sv[k])
        ov[a] = acc
    return out
