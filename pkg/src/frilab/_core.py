"""Kernel backend selection.

The compiled extension is used when it imports cleanly; setting the
environment variable ``FRI_LAB_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("FRI_LAB_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

pulse_stream_coeffs = _impl.pulse_stream_coeffs
fourier_series_eval = _impl.fourier_series_eval


def backends():
    """Return the available kernel modules keyed by name."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels

        found["cython"] = _kernels
    except ImportError:
        pass
    return found
