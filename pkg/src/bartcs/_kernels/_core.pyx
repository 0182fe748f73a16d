# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled row-subset kernels.

Design matrices are Fortran-ordered so each column slice is contiguous;
the 2-D view below is declared column-major to match. Summation order is
strictly left to right over the row arrays, mirroring the pure backend.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "compiled"


def subset_sum(double[::1] values, long[::1] rows):
    """Sum of values over the given row indices, left to right."""
    cdef double total = 0.0
    cdef Py_ssize_t i
    for i in range(rows.shape[0]):
        total += values[rows[i]]
    return total


def partition_rows(double[::1] xcol, long[::1] rows, double cut):
    """Split rows into (x <= cut, x > cut), preserving order."""
    cdef Py_ssize_t m = rows.shape[0]
    cdef Py_ssize_t i, nl = 0, nr = 0
    left_arr = np.empty(m, dtype=np.int64)
    right_arr = np.empty(m, dtype=np.int64)
    cdef long[::1] left = left_arr
    cdef long[::1] right = right_arr
    for i in range(m):
        if xcol[rows[i]] <= cut:
            left[nl] = rows[i]
            nl += 1
        else:
            right[nr] = rows[i]
            nr += 1
    return left_arr[:nl].copy(), right_arr[:nr].copy()


def count_left(double[::1] xcol, long[::1] rows, double cut):
    """Number of rows with x <= cut."""
    cdef Py_ssize_t i, count = 0
    for i in range(rows.shape[0]):
        if xcol[rows[i]] <= cut:
            count += 1
    return count


def cutpoint_pool(double[::1] xcol, long[::1] rows):
    """Sorted unique values of x over rows, excluding the maximum."""
    cdef Py_ssize_t m = rows.shape[0]
    cdef Py_ssize_t i, k
    sub_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] sub = sub_arr
    for i in range(m):
        sub[i] = xcol[rows[i]]
    sub_arr.sort()
    # count unique entries
    k = 1
    for i in range(1, m):
        if sub[i] != sub[i - 1]:
            k += 1
    out_arr = np.empty(k - 1, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t j = 0
    for i in range(m - 1):
        if sub[i + 1] != sub[i]:
            out[j] = sub[i]
            j += 1
    return out_arr


def has_two_distinct(double[::1] xcol, long[::1] rows):
    """True when x takes at least two values over rows."""
    cdef Py_ssize_t i
    cdef double first
    if rows.shape[0] < 2:
        return False
    first = xcol[rows[0]]
    for i in range(1, rows.shape[0]):
        if xcol[rows[i]] != first:
            return True
    return False


def available_predictors(double[::1, :] X, long[::1] rows):
    """Columns with at least two distinct values over rows (ascending)."""
    cdef Py_ssize_t p = X.shape[1]
    cdef Py_ssize_t m = rows.shape[0]
    cdef Py_ssize_t i, j, count = 0
    cdef double first
    out_arr = np.empty(p, dtype=np.int64)
    cdef long[::1] out = out_arr
    if m < 2:
        return out_arr[:0].copy()
    for j in range(p):
        first = X[rows[0], j]
        for i in range(1, m):
            if X[rows[i], j] != first:
                out[count] = j
                count += 1
                break
    return out_arr[:count].copy()


def assign_leaf(double[::1] fit, long[::1] rows, double mu):
    """Write mu into fit at the given row indices."""
    cdef Py_ssize_t i
    for i in range(rows.shape[0]):
        fit[rows[i]] = mu
