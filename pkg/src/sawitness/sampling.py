"""Deterministic low-discrepancy rational sample points."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy.stats import qmc

from .sets import Box

GRID_BITS = 20


def unit_samples(n: int, dim: int, seed: int) -> np.ndarray:
    """``n`` scrambled Halton points in ``[0, 1)^dim``, reproducible from ``seed``."""
    if n <= 0 or dim <= 0:
        return np.zeros((max(n, 0), max(dim, 0)))
    return qmc.Halton(d=dim, scramble=True, seed=seed).random(n)


def to_box(u: np.ndarray, box: Box, bits: int = GRID_BITS) -> list[tuple[Fraction, ...]]:
    """Snap unit-cube samples to the dyadic grid of ``box``, strictly inside it."""
    top = 1 << bits
    ks = np.clip(np.floor(u * top).astype(np.int64), 1, top - 1)
    lows, widths = box.lows, box.widths()
    return [tuple(lo + w * Fraction(int(k), top) for lo, w, k in zip(lows, widths, row)) for row in ks]


def sample_points(box: Box, n: int, seed: int) -> list[tuple[Fraction, ...]]:
    return to_box(unit_samples(n, box.dim, seed), box)
