"""Supervised comparison metrics: F1, OC-cost and pPDQ.

All functions score one image: a list of predictions against a ground truth
set. Boxes are compared with :mod:`ccs.geometry`; pPDQ additionally
rasterises boxes onto the integer pixel grid (a pixel belongs to a box when
its centre does).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, NamedTuple, Optional, Sequence

import numpy as np

from .assignment import min_cost_assignment
from .geometry import BBox, Detection, DetectionSet, boxes_to_array, iou_matrix


@dataclass(frozen=True)
class GroundTruthObject:
    box: BBox
    class_id: int


@dataclass(frozen=True)
class GroundTruthSet:
    image_id: Hashable
    objects: tuple[GroundTruthObject, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "objects", tuple(self.objects))

    def __len__(self) -> int:
        return len(self.objects)


@dataclass(frozen=True)
class MetricConfig:
    alpha_iou: float = 0.5
    # `lambda` is reserved; the config key is still "metrics.lambda".
    lam: float = 1.0
    beta_dummy: float = 0.6
    epsilon: float = 0.1
    # Number of classes for the implied label distribution; None infers it.
    num_classes: Optional[int] = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.alpha_iou <= 1.0):
            raise ValueError(f"alpha_iou must lie in [0, 1], got {self.alpha_iou}")
        if not (0.0 <= self.lam <= 1.0):
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")
        if self.beta_dummy < 0:
            raise ValueError(f"beta_dummy must be non-negative, got {self.beta_dummy}")
        if not (0.0 < self.epsilon < 0.5):
            raise ValueError(f"epsilon must lie in (0, 0.5), got {self.epsilon}")
        if self.num_classes is not None and self.num_classes < 1:
            raise ValueError("num_classes must be positive")


@dataclass
class MatchResult:
    pairs: list[tuple[int, int]] = field(default_factory=list)
    tp: int = 0
    fp: int = 0
    fn: int = 0


class F1Result(NamedTuple):
    precision: float
    recall: float
    f1: float
    match: MatchResult


def _gt_boxes(gt: GroundTruthSet) -> np.ndarray:
    return boxes_to_array([o.box for o in gt.objects])


def _pred_boxes(preds: DetectionSet) -> np.ndarray:
    return boxes_to_array([d.box for d in preds])


# -- F1 ----------------------------------------------------------------------


def greedy_match(preds: DetectionSet, gt: GroundTruthSet, alpha_iou: float) -> MatchResult:
    """One-to-one matching in order of descending confidence.

    Each prediction takes the unmatched same-class ground truth with the
    highest IoU, provided that IoU is at least ``alpha_iou``. Ties go to the
    lower index on both sides.
    """
    ious = iou_matrix(_pred_boxes(preds), _gt_boxes(gt))
    order = sorted(range(len(preds)), key=lambda k: (-preds[k].score, k))
    taken = [False] * len(gt)
    pairs = []
    for p in order:
        best, best_iou = -1, -1.0
        for g, obj in enumerate(gt.objects):
            if taken[g] or obj.class_id != preds[p].class_id:
                continue
            v = ious[p, g]
            if v >= alpha_iou and v > best_iou:
                best, best_iou = g, v
        if best >= 0:
            taken[best] = True
            pairs.append((p, best))
    tp = len(pairs)
    return MatchResult(sorted(pairs), tp, len(preds) - tp, len(gt) - tp)


def f1_score(preds: DetectionSet, gt: GroundTruthSet, cfg: MetricConfig = MetricConfig()) -> F1Result:
    """Precision, recall and F1 of one image.

    An image with neither predictions nor ground truth scores 1 on all three.
    Undefined ratios otherwise count as 0.
    """
    match = greedy_match(preds, gt, cfg.alpha_iou)
    if len(preds) == 0 and len(gt) == 0:
        return F1Result(1.0, 1.0, 1.0, match)
    precision = match.tp / len(preds) if len(preds) else 0.0
    recall = match.tp / len(gt) if len(gt) else 0.0
    if precision + recall == 0:
        return F1Result(precision, recall, 0.0, match)
    return F1Result(precision, recall, 2 * precision * recall / (precision + recall), match)


# -- OC-cost -----------------------------------------------------------------


def oc_cost_matrix(preds: DetectionSet, gt: GroundTruthSet, cfg: MetricConfig) -> np.ndarray:
    """Pairwise matching cost ``lam * (1 - IoU) + (1 - lam) * class_mismatch``."""
    loc = 1.0 - iou_matrix(_pred_boxes(preds), _gt_boxes(gt))
    cls = np.array(
        [[float(d.class_id != o.class_id) for o in gt.objects] for d in preds], dtype=float
    ).reshape(len(preds), len(gt))
    return cfg.lam * loc + (1.0 - cfg.lam) * cls


def oc_cost(preds: DetectionSet, gt: GroundTruthSet, cfg: MetricConfig = MetricConfig()) -> float:
    """Optimal correction cost of one image.

    The pairwise cost matrix is padded with dummy rows and columns costing
    ``beta_dummy``, so any prediction or ground truth may stay unmatched at
    that price. The optimal total is divided by the number of real entities
    it accounts for: matches plus unmatched predictions plus unmatched
    ground truths.
    """
    n, k = len(preds), len(gt)
    if n == 0 and k == 0:
        return 0.0
    size = n + k
    padded = np.zeros((size, size))
    padded[:n, :k] = oc_cost_matrix(preds, gt, cfg)
    padded[:n, k:] = cfg.beta_dummy
    padded[n:, :k] = cfg.beta_dummy
    # dummy-to-dummy stays free
    assignment = min_cost_assignment(padded)
    matches = sum(1 for r, c in assignment.pairs if r < n and c < k)
    return assignment.cost / (n + k - matches)


# -- pPDQ --------------------------------------------------------------------


def _pixel_span(lo: float, hi: float) -> tuple[int, int]:
    # Pixel p is inside [lo, hi) iff lo <= p + 0.5 < hi.
    return math.ceil(lo - 0.5), math.ceil(hi - 0.5)


def pixel_extent(box: BBox) -> tuple[int, int, int, int]:
    """Half-open pixel index range ``(px0, py0, px1, py1)`` covered by ``box``."""
    px0, px1 = _pixel_span(box.x1, box.x2)
    py0, py1 = _pixel_span(box.y1, box.y2)
    return px0, py0, max(px0, px1), max(py0, py1)


def _pixel_count(e: tuple[int, int, int, int]) -> int:
    return (e[2] - e[0]) * (e[3] - e[1])


def _overlap_count(a: tuple[int, int, int, int], b: tuple[int, int, int, int]) -> int:
    w = min(a[2], b[2]) - max(a[0], b[0])
    h = min(a[3], b[3]) - max(a[1], b[1])
    return max(0, w) * max(0, h)


def spatial_quality(gt_box: BBox, pred_box: BBox, epsilon: float) -> float:
    """Spatial quality of a box detection against a ground-truth box.

    The detection puts foreground probability ``1 - epsilon`` on its own
    pixels and ``epsilon`` everywhere else. The foreground loss averages
    ``-log p`` over the ground-truth pixels; the background loss sums
    ``-log(1 - p)`` over predicted pixels outside the ground truth and
    divides by the ground-truth pixel count.
    """
    g = pixel_extent(gt_box)
    n_gt = _pixel_count(g)
    if n_gt == 0:
        raise ValueError(f"ground-truth box {gt_box} covers no pixel centre")
    d = pixel_extent(pred_box)
    n_pred = _pixel_count(d)
    n_both = _overlap_count(g, d)
    log_in = -math.log(1.0 - epsilon)
    log_out = -math.log(epsilon)
    fg = (n_both * log_in + (n_gt - n_both) * log_out) / n_gt
    bg = (n_pred - n_both) * log_out / n_gt
    return math.exp(-(fg + bg))


def label_probability(det: Detection, class_id: int, num_classes: int) -> float:
    """Probability the detection assigns to ``class_id``.

    Without an explicit distribution the score sits on the predicted class
    and the remainder is spread evenly over the other classes.
    """
    if det.class_distribution is not None:
        dist = det.class_distribution
        return float(dist[class_id]) if 0 <= class_id < len(dist) else 0.0
    if class_id == det.class_id:
        return det.score
    if num_classes <= 1:
        return 0.0
    return (1.0 - det.score) / (num_classes - 1)


def _num_classes(preds: DetectionSet, gt: GroundTruthSet, cfg: MetricConfig) -> int:
    if cfg.num_classes is not None:
        return cfg.num_classes
    ids = [d.class_id for d in preds] + [o.class_id for o in gt.objects]
    return max(2, max(ids, default=0) + 1)


def ppdq_pair(
    g: GroundTruthObject,
    d: Detection,
    cfg: MetricConfig = MetricConfig(),
    num_classes: int = 2,
) -> float:
    """Geometric mean of spatial and label quality for one pair."""
    ql = label_probability(d, g.class_id, num_classes)
    if ql <= 0.0:
        return 0.0
    return math.sqrt(spatial_quality(g.box, d.box, cfg.epsilon) * ql)


def ppdq_matrix(preds: DetectionSet, gt: GroundTruthSet, cfg: MetricConfig) -> np.ndarray:
    k = _num_classes(preds, gt, cfg)
    out = np.zeros((len(preds), len(gt)))
    for i, d in enumerate(preds):
        for j, o in enumerate(gt.objects):
            out[i, j] = ppdq_pair(o, d, cfg, k)
    return out


def ppdq_image(preds: DetectionSet, gt: GroundTruthSet, cfg: MetricConfig = MetricConfig()) -> float:
    """Image-level pPDQ.

    Predictions and ground truths are paired to maximise the summed pair
    quality; pairs of zero quality do not count as matches. The summed
    quality is divided by ``TP + FP + FN``.
    """
    n, k = len(preds), len(gt)
    if n == 0 and k == 0:
        return 1.0
    if n == 0 or k == 0:
        return 0.0
    q = ppdq_matrix(preds, gt, cfg)
    assignment = min_cost_assignment(1.0 - q)
    scores = [q[r, c] for r, c in assignment.pairs if q[r, c] > 0]
    tp = len(scores)
    return math.fsum(scores) / (tp + (n - tp) + (k - tp))
