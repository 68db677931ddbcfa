"""Backend selection for the hot kernels.

The compiled extension is preferred. Setting ``CANREV_PURE_PYTHON=1`` forces
the numpy fallback, which is also used automatically when the extension was
not built.
"""

import os

if os.environ.get("CANREV_PURE_PYTHON", "") not in ("", "0"):
    from . import _purekernels as _impl

    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        from . import _purekernels as _impl

        BACKEND = "python"

decode_channels = _impl.decode_channels
nearest_indices = _impl.nearest_indices
pearson = _impl.pearson
pearson_rows = _impl.pearson_rows
moving_average = _impl.moving_average
diff_stdev = _impl.diff_stdev

__all__ = [
    "BACKEND",
    "decode_channels",
    "nearest_indices",
    "pearson",
    "pearson_rows",
    "moving_average",
    "diff_stdev",
]
