"""Shared finite-difference helpers on the pixel grid."""

import numpy as np


def central_gradient(values):
    """Central differences with reflecting (edge-replicated) boundary.

    Returns (gx, gy) where gx differentiates along columns (x) and gy
    along rows (y); both have the input's shape.
    """
    p = np.pad(values, 1, mode="edge")
    gx = 0.5 * (p[1:-1, 2:] - p[1:-1, :-2])
    gy = 0.5 * (p[2:, 1:-1] - p[:-2, 1:-1])
    return gx, gy
