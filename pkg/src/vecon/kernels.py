"""Backend selection for the heatmap hot loops.

The compiled Cython module is used when it imports; otherwise the numpy
implementation. Set ``VECON_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("VECON_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

bin_points = _impl.bin_points
convolve_rows = _impl.convolve_rows
