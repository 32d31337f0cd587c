"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise the numpy
fallback is imported. Setting ``FPSPEC_PURE_PYTHON=1`` forces the fallback.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("FPSPEC_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"


def hermite_series_eval(alphas, coeffs, points) -> np.ndarray:
    """Polynomial part of a Hermite series, sum_k c_k H_{alpha_k}(x), at each row of ``points``."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points.reshape(1, -1)
    alphas = np.ascontiguousarray(alphas, dtype=np.int64).reshape(-1, points.shape[1])
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    if alphas.shape[0] == 0:
        return np.zeros(points.shape[0])
    return np.asarray(_impl.hermite_series_eval(alphas, coeffs, points))
