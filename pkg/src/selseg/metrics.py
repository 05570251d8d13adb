"""Mask accuracy scoring."""

from dataclasses import dataclass

import numpy as np


@dataclass
class AccuracyScore:
    """Tanimoto overlap in [0, 1] plus the raw region sizes."""

    tc: float
    intersection: int
    union: int


def tanimoto(mask, reference):
    """Tanimoto coefficient |A & B| / |A | B|.

    Two empty masks score 1.0; exactly one empty scores 0.0.
    """
    a = mask.data.astype(bool)
    b = reference.data.astype(bool)
    if a.shape != b.shape:
        raise ValueError(f"mask shapes differ: {a.shape} vs {b.shape}")
    inter = int(np.logical_and(a, b).sum())
    union = int(np.logical_or(a, b).sum())
    if union == 0:
        return AccuracyScore(tc=1.0, intersection=0, union=0)
    return AccuracyScore(tc=inter / union, intersection=inter, union=union)


def tc_color(tc):
    """Map a score to an 8-bit red-to-green heat color.

    Linear (1-tc, tc, 0) scaled to 255 with round-half-up, so 0.5 maps
    to (128, 128, 0).
    """
    if not 0.0 <= tc <= 1.0:
        raise ValueError(f"tc must lie in [0, 1], got {tc}")

    def scale(v):
        return int(np.floor(v * 255.0 + 0.5))

    return (scale(1.0 - tc), scale(tc), 0)
