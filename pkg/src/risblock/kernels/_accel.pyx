# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled steering-sum accumulation kernel.

Same contract and accumulation order as the numpy reference
(risblock.kernels._reference.accumulate_steering_outer); see there for the
math. Kept allocation-free in the inner loop.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from "complex.h":
    double complex cexp(double complex) nogil


def accumulate_steering_outer(coeffs, row_rates, col_rates, int n_rows, int n_cols):
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] c = np.ascontiguousarray(
        coeffs, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] rr = np.ascontiguousarray(
        row_rates, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] cr = np.ascontiguousarray(
        col_rates, dtype=np.float64)
    if c.shape[0] != rr.shape[0] or c.shape[0] != cr.shape[0]:
        raise ValueError("coeffs, row_rates and col_rates must be equal-length 1-D")

    cdef cnp.ndarray[cnp.complex128_t, ndim=2] out = np.zeros(
        (n_rows, n_cols), dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] col_ramp = np.empty(
        n_cols, dtype=np.complex128)
    cdef Py_ssize_t k, r, m
    cdef double complex coeff, row_phase
    cdef double rrate, crate

    with nogil:
        for k in range(c.shape[0]):
            coeff = c[k]
            rrate = rr[k]
            crate = cr[k]
            for m in range(n_cols):
                col_ramp[m] = cexp(1j * (crate * m))
            for r in range(n_rows):
                row_phase = coeff * cexp(1j * (rrate * r))
                for m in range(n_cols):
                    out[r, m] = out[r, m] + row_phase * col_ramp[m]
    return out
