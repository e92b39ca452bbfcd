"""Backend selection for the hot overlap kernel.

The compiled Cython extension is used when available; setting the
environment variable TFIM_PURE_PYTHON=1 forces the numpy fallback (used by
the benchmark in benchmarks/bench_overlap.py to compare both).
"""

import os

from . import _overlap_py

if os.environ.get("TFIM_PURE_PYTHON"):
    _impl = _overlap_py
    BACKEND = "python"
else:
    try:
        from . import _overlap_cy as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _overlap_py
        BACKEND = "python"

overlap_merged = _impl.overlap_merged
