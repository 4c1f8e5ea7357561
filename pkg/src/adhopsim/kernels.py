"""Geometry kernels used on every transmission and mobility step.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
numpy versions in ``_pykernels`` are loaded. Set ``ADHOPSIM_PURE_PYTHON=1`` to
force the fallback. Both produce identical results for identical inputs.
"""
from __future__ import annotations

import os

if os.environ.get("ADHOPSIM_PURE_PYTHON"):
    from adhopsim import _pykernels as _impl

    BACKEND = "python"
else:
    try:
        from adhopsim import _ckernels as _impl
    except ImportError:
        from adhopsim import _pykernels as _impl

        BACKEND = "python"
    else:
        BACKEND = "cython"

advance = _impl.advance
in_range = _impl.in_range
mean_degree = _impl.mean_degree

__all__ = ["BACKEND", "advance", "in_range", "mean_degree"]
