"""Hot-loop kernels with backend selection at import time.

The compiled ``_speedups`` extension is used when it was built; otherwise
the pure-Python reference in ``_kernels_py`` is used. Setting
``HYERSLAB_PURE_PYTHON=1`` forces the fallback. Both backends produce
bit-identical results.
"""
import os

import numpy as np

from . import _kernels_py

MASK64 = _kernels_py.MASK64

_impl = _kernels_py
BACKEND = "python"
if os.environ.get("HYERSLAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _speedups as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py


def direction_hash(seed, keys):
    keys = np.ascontiguousarray(keys, dtype=np.int64)
    return _impl.direction_hash(int(seed) & MASK64, keys)


def unit_uniforms(state, n):
    return _impl.unit_uniforms(int(state) & MASK64, int(n))


def poly_mul(da, ca, db, cb, max_terms):
    return _impl.poly_mul(
        np.ascontiguousarray(da, dtype=np.int64),
        np.ascontiguousarray(ca, dtype=np.complex128),
        np.ascontiguousarray(db, dtype=np.int64),
        np.ascontiguousarray(cb, dtype=np.complex128),
        int(max_terms),
    )


def backends():
    """All importable backends, keyed by name (used by tests and the benchmark)."""
    out = {"python": _kernels_py}
    try:
        from . import _speedups
        out["cython"] = _speedups
    except ImportError:
        pass
    return out
