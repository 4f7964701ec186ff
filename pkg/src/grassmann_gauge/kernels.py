"""Backend selection for the term-dictionary kernels.

The compiled extension is used when it imports; setting GG_PURE_PYTHON=1
forces the pure-Python fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("GG_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

mul = _impl.mul
add_scaled = _impl.add_scaled
reduce_det = _impl.reduce_det
derive = _impl.derive
max_degree = _impl.max_degree
