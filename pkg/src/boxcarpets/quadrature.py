"""Composite Simpson quadrature on uniform grids, exposed as weight vectors."""

from __future__ import annotations

import numpy as np

from .errors import DomainError


def simpson_weights(x: np.ndarray) -> np.ndarray:
    """Weights w such that sum(w * f(x)) approximates the integral of f.

    Requires a uniform grid with at least 3 points.  For an even number of
    points the classic composite rule covers all but the last three
    intervals, which are closed with the 3/8 rule.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 3:
        raise DomainError("Simpson quadrature needs at least 3 sample points")
    steps = np.diff(x)
    h = (x[-1] - x[0]) / (n - 1)
    if h <= 0 or not np.allclose(steps, h, rtol=1e-9, atol=0.0):
        raise DomainError("Simpson quadrature requires a uniform, increasing grid")

    w = np.zeros(n)
    if n % 2 == 1:
        w[0] = w[-1] = 1.0
        w[1:-1:2] = 4.0
        w[2:-2:2] = 2.0
        w *= h / 3.0
    else:
        if n >= 6:
            w1 = np.zeros(n - 3)
            w1[0] = w1[-1] = 1.0
            w1[1:-1:2] = 4.0
            w1[2:-2:2] = 2.0
            w[: n - 3] += w1 * (h / 3.0)
        w[n - 4 :] += np.array([1.0, 3.0, 3.0, 1.0]) * (3.0 * h / 8.0)
    return w


def simpson_integral(y: np.ndarray, x: np.ndarray) -> float:
    """Convenience wrapper: integrate samples y over the grid x."""
    return float(simpson_weights(x) @ np.asarray(y, dtype=float))
