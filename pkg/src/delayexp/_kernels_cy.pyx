# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: same contracts as _kernels_py, loop-level implementation.

Any change here must be mirrored in _kernels_py (and vice versa); the test
suite asserts the two backends agree.
"""

import numpy as np

BACKEND_NAME = "compiled"


def fill_p_table(const double[:, :, ::1] d_stack, int m, int l_max):
    """Nested-sum layer table; see _kernels_py.fill_p_table for the contract."""
    cdef Py_ssize_t K = d_stack.shape[0]
    cdef Py_ssize_t n = d_stack.shape[1]
    table_arr = np.zeros((K + 1, l_max + 1, n, n))
    cdef double[:, :, :, ::1] table = table_arr
    cdef Py_ssize_t k, d, d_hi, i, j, t
    cdef double acc

    for k in range(K + 1):
        for i in range(n):
            table[k, 0, i, i] = 1.0

    for k in range(K):
        d_hi = k // (m + 1) + 1
        if d_hi > l_max:
            d_hi = l_max
        for d in range(1, d_hi + 1):
            if d == 1:
                # P(k-m, 0) = I for every k-m, so the update adds D_k itself.
                for i in range(n):
                    for j in range(n):
                        table[k + 1, 1, i, j] = table[k, 1, i, j] + d_stack[k, i, j]
            elif k - m >= 0:
                for i in range(n):
                    for j in range(n):
                        acc = table[k, d, i, j]
                        for t in range(n):
                            acc = acc + d_stack[k, i, t] * table[k - m, d - 1, t, j]
                        table[k + 1, d, i, j] = acc
            # d >= 2 with k < m is inside the empty-sum region: stays zero.
    return table_arr


def delay_layers(
    const double[:, ::1] a,
    const double[:, :, ::1] b_stack,
    int m,
    const double[:, :, ::1] init0,
):
    """Layered fundamental-family action; see _kernels_py.delay_layers."""
    cdef Py_ssize_t K = b_stack.shape[0]
    cdef Py_ssize_t n = init0.shape[1]
    cdef Py_ssize_t p = init0.shape[2]
    cdef Py_ssize_t l_max = (K + m) // (m + 1)
    r_arr = np.zeros((K + m + 1, l_max + 1, n, p))
    cdef double[:, :, :, ::1] r = r_arr
    cdef Py_ssize_t kappa, row, d, d_hi, i, c, t
    cdef double acc

    for row in range(m + 1):
        for i in range(n):
            for c in range(p):
                r[row, 0, i, c] = init0[row, i, c]

    for kappa in range(K):
        row = kappa + m
        for i in range(n):
            for c in range(p):
                acc = 0.0
                for t in range(n):
                    acc = acc + a[i, t] * r[row, 0, t, c]
                r[row + 1, 0, i, c] = acc
        d_hi = kappa // (m + 1) + 1
        if d_hi > l_max:
            d_hi = l_max
        for d in range(1, d_hi + 1):
            for i in range(n):
                for c in range(p):
                    acc = 0.0
                    for t in range(n):
                        acc = acc + a[i, t] * r[row, d, t, c]
                        acc = acc + b_stack[kappa, i, t] * r[kappa, d - 1, t, c]
                    r[row + 1, d, i, c] = acc
    return r_arr.sum(axis=1)
