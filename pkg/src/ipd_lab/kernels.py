"""Hot-loop kernels, compiled when available.

The Cython module ``_ckernels`` is used if it was built; otherwise the
numpy/pure-Python ``_pykernels`` is used. Set ``IPD_LAB_PURE_PYTHON=1`` to force
the fallback.
"""
from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("IPD_LAB_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        _impl = _pykernels

BACKEND = _impl.BACKEND
cesaro_exact = _impl.cesaro_exact
markov_path = _impl.markov_path
replicator_rk4 = _impl.replicator_rk4

__all__ = ["BACKEND", "cesaro_exact", "markov_path", "replicator_rk4"]
