# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: tridiagonal solves and smoothed-absolute-value
evaluations.  Mirrors viscoflow._pykernels."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND_NAME = "c"


def thomas_solve(cnp.float64_t[::1] dl, cnp.float64_t[::1] d,
                 cnp.float64_t[::1] du, rhs):
    """Solve a tridiagonal system T x = rhs (rhs of shape (n,) or (n, m))."""
    rhs_arr = np.ascontiguousarray(rhs, dtype=np.float64)
    squeeze = rhs_arr.ndim == 1
    if squeeze:
        rhs_arr = rhs_arr[:, None]
    cdef cnp.float64_t[:, ::1] b = rhs_arr
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t m = b.shape[1]
    out = np.empty((n, m), dtype=np.float64)
    cdef cnp.float64_t[:, ::1] x = out
    cdef cnp.float64_t[::1] cp = np.empty(n, dtype=np.float64)
    cdef cnp.float64_t[::1] dp = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double piv

    for j in range(m):
        cp[0] = du[0] / d[0] if n > 1 else 0.0
        dp[0] = b[0, j] / d[0]
        for i in range(1, n):
            piv = d[i] - dl[i - 1] * cp[i - 1]
            cp[i] = du[i] / piv if i < n - 1 else 0.0
            dp[i] = (b[i, j] - dl[i - 1] * dp[i - 1]) / piv
        x[n - 1, j] = dp[n - 1]
        for i in range(n - 2, -1, -1):
            x[i, j] = dp[i] - cp[i] * x[i + 1, j]
    if squeeze:
        return out[:, 0]
    return out


def abs_value(v, double rho):
    v_arr = np.ascontiguousarray(np.atleast_1d(v), dtype=np.float64)
    cdef cnp.float64_t[::1] vv = v_arr.ravel()
    out = np.empty(vv.shape[0], dtype=np.float64)
    cdef cnp.float64_t[::1] o = out
    cdef Py_ssize_t i
    cdef double a
    for i in range(vv.shape[0]):
        a = vv[i] if vv[i] >= 0.0 else -vv[i]
        if a >= rho:
            o[i] = a
        else:
            o[i] = rho / 3.0 + (vv[i] * vv[i] / (rho * rho)) * (rho - a / 3.0)
    return _restore(out, v)


def abs_deriv(v, double rho):
    v_arr = np.ascontiguousarray(np.atleast_1d(v), dtype=np.float64)
    cdef cnp.float64_t[::1] vv = v_arr.ravel()
    out = np.empty(vv.shape[0], dtype=np.float64)
    cdef cnp.float64_t[::1] o = out
    cdef Py_ssize_t i
    cdef double a, s
    for i in range(vv.shape[0]):
        a = vv[i] if vv[i] >= 0.0 else -vv[i]
        s = 0.0 if vv[i] == 0.0 else (1.0 if vv[i] > 0.0 else -1.0)
        if a >= rho:
            o[i] = s
        else:
            o[i] = s * (2.0 * a / rho - (vv[i] * vv[i]) / (rho * rho))
    return _restore(out, v)


def abs_second(v, double rho):
    v_arr = np.ascontiguousarray(np.atleast_1d(v), dtype=np.float64)
    cdef cnp.float64_t[::1] vv = v_arr.ravel()
    out = np.empty(vv.shape[0], dtype=np.float64)
    cdef cnp.float64_t[::1] o = out
    cdef Py_ssize_t i
    cdef double a
    for i in range(vv.shape[0]):
        a = vv[i] if vv[i] >= 0.0 else -vv[i]
        if a >= rho:
            o[i] = 0.0
        else:
            o[i] = 2.0 / rho - 2.0 * a / (rho * rho)
    return _restore(out, v)


def _restore(out, v):
    arr = np.asarray(v)
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)
