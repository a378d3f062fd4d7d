"""Minimum-cost rectangular assignment."""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.optimize import linear_sum_assignment


class Assignment(NamedTuple):
    pairs: list[tuple[int, int]]
    cost: float


def min_cost_assignment(cost: np.ndarray) -> Assignment:
    """Assign rows to columns one-to-one at minimum total cost.

    For an ``n x k`` matrix exactly ``min(n, k)`` pairs are returned, sorted by
    row. The total is summed with :func:`math.fsum` so that equal-cost
    optima report identical totals.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2:
        raise ValueError(f"cost must be 2-D, got shape {cost.shape}")
    if cost.size == 0:
        return Assignment([], 0.0)
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix must be finite")
    rows, cols = linear_sum_assignment(cost)
    pairs = [(int(r), int(c)) for r, c in zip(rows, cols)]
    return Assignment(pairs, math.fsum(cost[r, c] for r, c in pairs))
