# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``.

Rotation phases use the recurrence ``exp(i a (m+1)) = exp(i a m) exp(i a)``
over the equally spaced J_y spectrum ``-n/2, ..., n/2``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos

cnp.import_array()

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double complex conj(double complex)


def alternating_sum(theta, int n):
    cdef double[:, ::1] t = np.ascontiguousarray(theta, dtype=np.float64)
    cdef Py_ssize_t S = t.shape[0], L = t.shape[1]
    s_arr = np.zeros(S, dtype=np.float64)
    ds_arr = np.zeros((S, L), dtype=np.float64)
    cdef double[::1] s = s_arr
    cdef double[:, ::1] ds = ds_arr
    cdef Py_ssize_t i, l
    cdef double partial, x, sign, acc, half_n = 0.5 * n
    with nogil:
        for i in range(S):
            partial = 0.0
            sign = 1.0
            # forward pass: s and per-term sines stored in ds[i, l]
            for l in range(L):
                x = half_n * partial
                s[i] += sign * cos(x)
                ds[i, l] = sign * sin(x) * half_n
                partial += t[i, l]
                sign = -sign
            # ds[k] = -sum_{l > k} term[l]
            acc = 0.0
            for l in range(L - 1, -1, -1):
                x = ds[i, l]
                ds[i, l] = -acc
                acc += x
    return s_arr, ds_arr


cdef inline void _layer(double complex[::1] st, double complex[::1] e0,
                        double complex f, double alpha, double w0, Py_ssize_t d) nogil:
    cdef double complex proj = 0
    cdef double complex ph, step
    cdef Py_ssize_t m
    for m in range(d):
        proj = proj + conj(e0[m]) * st[m]
    proj = proj * f
    ph = cexp(1j * alpha * w0)
    step = cexp(1j * alpha)
    for m in range(d):
        st[m] = (st[m] + proj * e0[m]) * ph
        ph = ph * step


def _check_spectrum(w):
    w = np.asarray(w, dtype=np.float64)
    if w.size > 1 and not np.allclose(np.diff(w), 1.0, atol=1e-9):
        raise ValueError("compiled kernel needs the unit-spaced J_y spectrum")
    return float(w[0])


def layered_overlaps(w, e0, init, target, alphas, gammas):
    cdef double w0 = _check_spectrum(w)
    cdef double complex[::1] e0v = np.ascontiguousarray(e0, dtype=np.complex128)
    cdef double complex[::1] iv = np.ascontiguousarray(init, dtype=np.complex128)
    cdef double complex[::1] tv = np.ascontiguousarray(target, dtype=np.complex128)
    cdef double[:, ::1] a = np.ascontiguousarray(alphas, dtype=np.float64)
    cdef double[::1] g = np.ascontiguousarray(gammas, dtype=np.float64)
    cdef Py_ssize_t S = a.shape[0], L = a.shape[1], d = e0v.shape[0]
    out_arr = np.empty(S, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef double complex[::1] st = np.empty(d, dtype=np.complex128)
    fs_arr = np.exp(1j * np.asarray(gammas, dtype=np.float64)) - 1.0
    cdef double complex[::1] fs = fs_arr
    cdef Py_ssize_t i, k, m
    cdef double complex acc
    with nogil:
        for i in range(S):
            for m in range(d):
                st[m] = iv[m]
            for k in range(L):
                _layer(st, e0v, fs[k], a[i, k], w0, d)
            acc = 0
            for m in range(d):
                acc = acc + conj(tv[m]) * st[m]
            out[i] = acc
    return out_arr


def layered_trace(w, e0, init, target, double alpha, double gamma, Py_ssize_t L):
    cdef double w0 = _check_spectrum(w)
    cdef double complex[::1] e0v = np.ascontiguousarray(e0, dtype=np.complex128)
    cdef double complex[::1] tv = np.ascontiguousarray(target, dtype=np.complex128)
    cdef double complex[::1] st = np.array(init, dtype=np.complex128)
    cdef Py_ssize_t d = e0v.shape[0], k, m
    out_arr = np.empty(L + 1, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    cdef double complex f = cexp(1j * gamma) - 1.0
    cdef double complex acc
    with nogil:
        for k in range(L + 1):
            if k > 0:
                _layer(st, e0v, f, alpha, w0, d)
            acc = 0
            for m in range(d):
                acc = acc + conj(tv[m]) * st[m]
            out[k] = acc
    return out_arr
