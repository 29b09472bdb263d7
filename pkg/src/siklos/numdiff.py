"""Central differences with one level of Richardson extrapolation."""

import numpy as np

REL_STEP = 1e-4


def default_step(x: float) -> float:
    return REL_STEP * max(1.0, abs(x))


def central_difference(f, x, i, h):
    e = np.zeros_like(x)
    e[i] = h
    return (np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2.0 * h)


def richardson_derivative(f, x, i, h=None):
    """d f / d x_i at ``x``; ``f`` may return any array shape.

    Combines step sizes h and h/2 so the O(h^2) error term cancels.
    """
    x = np.asarray(x, dtype=float)
    if h is None:
        h = default_step(x[i])
    coarse = central_difference(f, x, i, h)
    fine = central_difference(f, x, i, h / 2.0)
    return (4.0 * fine - coarse) / 3.0
