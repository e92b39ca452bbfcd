# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of _overlap_py.overlap_merged (hot kernel of the MC sweep)."""

import numpy as np

cimport numpy as cnp


def overlap_merged(double init_x, cnp.ndarray[cnp.float64_t, ndim=1] flips_x,
                   double init_y, cnp.ndarray[cnp.float64_t, ndim=1] flips_y,
                   double t_lo, double t_hi):
    """Exact integral of sigma_x(t)*sigma_y(t) over [t_lo, t_hi]."""
    cdef double[:] fx = flips_x
    cdef double[:] fy = flips_y
    cdef Py_ssize_t nx = fx.shape[0]
    cdef Py_ssize_t ny = fy.shape[0]
    cdef Py_ssize_t i = 0, j = 0
    cdef double acc = 0.0
    cdef double t_prev = t_lo
    cdef double sign = 1.0
    cdef double t_next

    while i < nx or j < ny:
        if j >= ny or (i < nx and fx[i] <= fy[j]):
            t_next = fx[i]
            i += 1
        else:
            t_next = fy[j]
            j += 1
        acc += sign * (t_next - t_prev)
        t_prev = t_next
        sign = -sign
    acc += sign * (t_hi - t_prev)
    return init_x * init_y * acc
