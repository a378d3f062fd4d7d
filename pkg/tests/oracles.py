"""Independent reference implementations used only by the tests.

None of these import the code paths they check: IoU and CCS are evaluated
in exact rational arithmetic with plain loops, assignment by exhaustive
permutation, Spearman by explicit rank lists, and pPDQ by rasterising
masks with numpy.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np


def iou_exact(a, b) -> Fraction:
    a = [Fraction(v) for v in a]
    b = [Fraction(v) for v in b]
    iw = max(Fraction(0), min(a[2], b[2]) - max(a[0], b[0]))
    ih = max(Fraction(0), min(a[3], b[3]) - max(a[1], b[1]))
    inter = iw * ih
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    return inter / union


def ccs_exact(views, beta=Fraction(1, 2), kappa=None):
    """CCS by the textbook loops over lists of box tuples.

    ``kappa`` defaults to the per-view box count. Returns ``(ccs, gamma)``
    with ``gamma`` a dict over ordered pairs.
    """
    m = len(views)
    gamma = {}
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            if not views[i] or not views[j]:
                gamma[(i, j)] = Fraction(0)
                continue
            total = Fraction(0)
            for bi in views[i]:
                row = [iou_exact(bi, bj) for bj in views[j]]
                row = [v if v >= beta else Fraction(0) for v in row]
                total += max(row)
            k = len(views[i]) if kappa is None else kappa[i]
            gamma[(i, j)] = total / k
    return sum(gamma.values()) / (m * (m - 1)), gamma


def brute_force_assignment(cost: np.ndarray) -> float:
    n, k = cost.shape
    if n == 0 or k == 0:
        return 0.0
    best = math.inf
    if n <= k:
        for cols in itertools.permutations(range(k), n):
            best = min(best, math.fsum(cost[r, c] for r, c in enumerate(cols)))
    else:
        for rows in itertools.permutations(range(n), k):
            best = min(best, math.fsum(cost[r, c] for c, r in enumerate(rows)))
    return best


def average_ranks(xs) -> list[float]:
    """Rank by counting: rank = #smaller + (#equal + 1) / 2."""
    return [
        sum(1 for y in xs if y < x) + (sum(1 for y in xs if y == x) + 1) / 2 for x in xs
    ]


def spearman_bruteforce(pairs) -> float:
    rx = average_ranks([p[0] for p in pairs])
    ry = average_ranks([p[1] for p in pairs])
    n = len(pairs)
    mx, my = sum(rx) / n, sum(ry) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    vx = sum((a - mx) ** 2 for a in rx)
    vy = sum((b - my) ** 2 for b in ry)
    return cov / math.sqrt(vx * vy)


def spearman_closed_form(pairs) -> float:
    rx = average_ranks([p[0] for p in pairs])
    ry = average_ranks([p[1] for p in pairs])
    n = len(pairs)
    d2 = sum((a - b) ** 2 for a, b in zip(rx, ry))
    return 1 - 6 * d2 / (n * (n * n - 1))


def raster_mask(box, shape) -> np.ndarray:
    """Pixel-centre rasterisation of ``box`` onto an ``(H, W)`` grid."""
    h, w = shape
    cy, cx = np.mgrid[0:h, 0:w] + 0.5
    x1, y1, x2, y2 = box
    return (cx >= x1) & (cx < x2) & (cy >= y1) & (cy < y2)


def spatial_quality_raster(gt_box, pred_box, eps, shape=(64, 64)) -> float:
    g = raster_mask(gt_box, shape)
    d = raster_mask(pred_box, shape)
    p = np.where(d, 1.0 - eps, eps)
    l_fg = -np.log(p[g]).mean()
    l_bg = -np.log(1.0 - p[d & ~g]).sum() / g.sum()
    return float(np.exp(-(l_fg + l_bg)))
