# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled raster loops; same contract as the pure-Python module."""

from libc.math cimport exp, INFINITY, NAN


def argmax_grid(double[:] ax, double[:] ay, double[:] const, double x0, double dx,
                double y0, double dy, Py_ssize_t nx, Py_ssize_t ny,
                int[:] out_index, double[:] out_gap):
    cdef Py_ssize_t n = ax.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double x, y, v, best, second
    cdef int arg
    cdef double[64] base
    if n > 64:
        raise ValueError("at most 64 phases per raster")
    for j in range(ny):
        y = y0 + (j + 0.5) * dy
        for k in range(n):
            base[k] = ay[k] * y + const[k]
        for i in range(nx):
            x = x0 + (i + 0.5) * dx
            best = -INFINITY
            second = -INFINITY
            arg = 0
            for k in range(n):
                v = ax[k] * x + base[k]
                if v > best:
                    second = best
                    best = v
                    arg = <int>k
                elif v > second:
                    second = v
            out_index[j * nx + i] = arg
            out_gap[j * nx + i] = best - second if n > 1 else INFINITY


def exact_u_grid(double[:] ax, double[:] ay, double[:] const, double[:] weight_sign,
                 double x0, double dx, double y0, double dy, Py_ssize_t nx, Py_ssize_t ny,
                 double inv_hbar, double[:] out_u):
    cdef Py_ssize_t n = ax.shape[0]
    cdef Py_ssize_t i, j, k, l
    cdef double x, y, v, top, total, acc, d
    cdef double[64] w
    if n > 64:
        raise ValueError("at most 64 phases per raster")
    for j in range(ny):
        y = y0 + (j + 0.5) * dy
        for i in range(nx):
            x = x0 + (i + 0.5) * dx
            top = -INFINITY
            for k in range(n):
                v = ax[k] * x + ay[k] * y + const[k]
                w[k] = v
                if v > top:
                    top = v
            total = 0.0
            for k in range(n):
                w[k] = weight_sign[k] * exp((w[k] - top) * inv_hbar)
                total += w[k]
            if total <= 0.0:
                out_u[j * nx + i] = NAN
                continue
            acc = 0.0
            for k in range(n):
                for l in range(k + 1, n):
                    d = ax[l] - ax[k]
                    acc += d * d * w[k] * w[l]
            out_u[j * nx + i] = 2.0 * acc / (total * total)
