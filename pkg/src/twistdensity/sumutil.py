"""Compensated summation helpers.

Long family sums (up to ~10^6 terms) are accumulated blockwise: exact
`math.fsum` inside each block, then an fsum reduction over block partials
in a fixed order.  The result is independent of how blocks are assigned
to workers, which is what makes multi-worker runs reproduce single-worker
totals bit for bit.
"""

from __future__ import annotations

import math

import numpy as np


def neumaier_sum(values) -> float:
    """Kahan-Neumaier compensated sum of an iterable of floats."""
    total = 0.0
    comp = 0.0
    for v in values:
        t = total + v
        if abs(total) >= abs(v):
            comp += (total - t) + v
        else:
            comp += (v - t) + total
        total = t
    return total + comp


def fsum_array(a: np.ndarray) -> float:
    """Exact (correctly rounded) sum of a float64 array."""
    return math.fsum(a.tolist())


def block_slices(n: int, block: int = 65536):
    """Yield (lo, hi) index pairs covering range(n) in fixed-size blocks."""
    lo = 0
    while lo < n:
        hi = min(lo + block, n)
        yield lo, hi
        lo = hi


def reduce_partials(partials) -> float:
    """Order-fixed exact reduction of per-block partial sums."""
    return math.fsum(partials)
