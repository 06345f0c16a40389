"""Select the compiled kernels when available, the pure-Python ones otherwise.

Set ``MODGRAPHS_PURE=1`` to force the pure-Python implementation.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("MODGRAPHS_PURE"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "compiled"

generate_shape = _impl.generate_shape
fill_adjacency = _impl.fill_adjacency

# the pure versions are always available (the exact fallback runs on them)
generate_shape_py = _kernels_py.generate_shape
fill_adjacency_py = _kernels_py.fill_adjacency


def backend() -> str:
    return BACKEND
