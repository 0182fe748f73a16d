"""Kernel backend selection.

The compiled Cython module is preferred when it imported cleanly; otherwise
the pure-numpy fallback is used. ``BARTCS_BACKEND=compiled|pure`` forces the
choice (requesting an unavailable compiled backend is an error rather than a
silent downgrade).
"""

import os

from . import _pure

_requested = os.environ.get("BARTCS_BACKEND", "").strip().lower()

try:
    from . import _core
except ImportError:
    _core = None

if _requested == "pure":
    _impl = _pure
elif _requested == "compiled":
    if _core is None:
        raise ImportError(
            "BARTCS_BACKEND=compiled but the compiled kernels are not built")
    _impl = _core
elif _requested == "":
    _impl = _core if _core is not None else _pure
else:
    raise ImportError(f"unknown BARTCS_BACKEND value: {_requested!r}")

BACKEND = _impl.BACKEND
subset_sum = _impl.subset_sum
partition_rows = _impl.partition_rows
count_left = _impl.count_left
cutpoint_pool = _impl.cutpoint_pool
has_two_distinct = _impl.has_two_distinct
available_predictors = _impl.available_predictors
assign_leaf = _impl.assign_leaf
