"""Kernel backend selection.

Imports the compiled extension when available, otherwise the pure-Python
fallback. Set PERTURBLAB_PURE_PYTHON=1 to force the fallback (used by the
kernel benchmark and the backend-parity tests).
"""
from __future__ import annotations

import os

if os.environ.get("PERTURBLAB_PURE_PYTHON"):
    from perturblab import _kernels_py as _impl
else:
    try:
        from perturblab import _speedups as _impl  # type: ignore[no-redef]
    except ImportError:
        from perturblab import _kernels_py as _impl  # type: ignore[no-redef]

BACKEND = "python" if _impl.__name__.endswith("_kernels_py") else "cython"

MULTIPLIER = _impl.MULTIPLIER
INCREMENT = _impl.INCREMENT
STREAM_MIX_A = _impl.STREAM_MIX_A
STREAM_MIX_B = _impl.STREAM_MIX_B

lcg_step = _impl.lcg_step
seed_state = _impl.seed_state
draw = _impl.draw
permutation = _impl.permutation
shuffle_by_length = _impl.shuffle_by_length
swap_adjacent = _impl.swap_adjacent
swap_first_third = _impl.swap_first_third
splice_marker = _impl.splice_marker
reverse_tail = _impl.reverse_tail
reverse_whole = _impl.reverse_whole
scatter_markers = _impl.scatter_markers
