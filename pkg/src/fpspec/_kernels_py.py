"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def hermite_series_eval(alphas, coeffs, points):
    """Evaluate sum_k coeffs[k] * prod_i He_{alphas[k, i]}(points[n, i])."""
    alphas = np.asarray(alphas, dtype=np.int64)
    coeffs = np.asarray(coeffs, dtype=np.float64)
    points = np.asarray(points, dtype=np.float64)
    K, d = alphas.shape
    N = points.shape[0]
    if points.shape[1] != d:
        raise ValueError("points and alphas disagree on dimension")
    if coeffs.shape[0] != K:
        raise ValueError("one coefficient per multi-index required")
    if K == 0:
        return np.zeros(N)
    if alphas.min() < 0:
        raise ValueError("negative multi-index entry")
    maxdeg = int(alphas.max())

    table = np.empty((maxdeg + 1, N, d))
    table[0] = 1.0
    if maxdeg >= 1:
        table[1] = points
    for j in range(1, maxdeg):
        table[j + 1] = points * table[j] - j * table[j - 1]

    # (K, N) product over coordinates
    prod = np.ones((K, N))
    for i in range(d):
        prod *= table[alphas[:, i], :, i]
    return coeffs @ prod
