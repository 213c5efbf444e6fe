"""Rank-based training weights.

Each example's weight depends on its score only through its zero-based
competition rank (the count of strictly better scores):

    rank(x)  = |{ x_i : f(x_i) > f(x) }|
    w(x)    ~  1 / (10**(-k) * N + rank(x)),   normalized to sum to 1.

Larger k concentrates weight on the best-ranked examples; ties share a rank
and therefore a weight.
"""

from __future__ import annotations

import numpy as np


def rank(scores) -> np.ndarray:
    """Zero-based competition rank of each score (0 = best, ties equal)."""
    s = np.asarray(scores, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("scores must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    ordered = np.sort(s)
    # count strictly greater = N - (count <= s_j)
    return (s.size - np.searchsorted(ordered, s, side="right")).astype(np.int64)


def weights(scores, k: float) -> np.ndarray:
    """Normalized reciprocal-rank weights with flattening exponent k.

    Args:
        scores: finite objective values, one per example.
        k: nonnegative exponent; the rank offset is 10**(-k) * N, so larger
            k makes the weight profile steeper.

    Returns:
        Weights summing to exactly 1 (normalized after the reciprocal).
    """
    r = rank(scores)
    n = r.size
    unnorm = 1.0 / (10.0 ** (-k) * n + r)
    return unnorm / unnorm.sum()
