"""Pure-numpy kernel backend.

Mirrors the signatures of the compiled backend. Results can differ from the
compiled kernels in the last float bits because numpy reduces sums pairwise
while the C loops accumulate left to right; each backend on its own is
deterministic.
"""

import numpy as np

BACKEND = "pure"


def subset_sum(values, rows):
    """Sum of values[rows]."""
    return float(np.sum(values[rows]))


def partition_rows(xcol, rows, cut):
    """Split rows by xcol[row] <= cut, preserving order."""
    mask = xcol[rows] <= cut
    return rows[mask], rows[~mask]


def count_left(xcol, rows, cut):
    """Number of rows with xcol[row] <= cut."""
    return int(np.count_nonzero(xcol[rows] <= cut))


def cutpoint_pool(xcol, rows):
    """Sorted unique values of xcol over rows, excluding the maximum."""
    u = np.unique(xcol[rows])
    return u[:-1]


def has_two_distinct(xcol, rows):
    """True if xcol takes at least two values over rows."""
    sub = xcol[rows]
    return bool(sub.min() < sub.max())


def available_predictors(X, rows):
    """Indices of columns with at least two distinct values over rows."""
    sub = X[rows]
    return np.flatnonzero(sub.min(axis=0) < sub.max(axis=0)).astype(np.int64)


def assign_leaf(fit, rows, mu):
    """Set fit[rows] = mu in place."""
    fit[rows] = mu
