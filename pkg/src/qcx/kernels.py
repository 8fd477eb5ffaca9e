"""Backend selection for the piecewise-linear kernels.

The compiled extension ``qcx._kernels`` is used when importable; otherwise the
numpy implementation in ``qcx._fallback``. Set ``QCX_BACKEND=python`` to force
the fallback.
"""

from __future__ import annotations

import os

from qcx import _fallback

_forced = os.environ.get("QCX_BACKEND", "").strip().lower()

if _forced == "python":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from qcx import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        if _forced == "cython":
            raise
        _impl = _fallback
        BACKEND = "python"

pl_eval = _impl.pl_eval
pl_increments = _impl.pl_increments
pl_rho = _impl.pl_rho
pl_segment_averages = _impl.pl_segment_averages

# shared helpers that only exist in numpy form
log1p_ratio = _fallback.log1p_ratio
ratio_integral = _fallback.ratio_integral
segment_pieces = _fallback.segment_pieces


def backends():
    """Map of available backend name -> kernel module."""
    out = {"python": _fallback}
    try:
        from qcx import _kernels
        out["cython"] = _kernels
    except ImportError:
        pass
    return out
