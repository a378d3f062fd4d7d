"""Axis-aligned boxes, detections and IoU.

Boxes use the corner convention ``(x1, y1, x2, y2)`` in continuous pixel
coordinates. Conversions from other layouts live in :mod:`ccs.io`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np


class InvalidBoxError(ValueError):
    """Raised when a box has non-finite coordinates or non-positive area."""


@dataclass(frozen=True)
class BBox:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(c) for c in coords):
            raise InvalidBoxError(f"non-finite box coordinates: {coords}")
        if not (self.x1 < self.x2 and self.y1 < self.y2):
            raise InvalidBoxError(f"box must satisfy x1<x2 and y1<y2: {coords}")

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)

    def translate(self, dx: float, dy: float) -> "BBox":
        return BBox(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)


@dataclass(frozen=True)
class Detection:
    """A scored, class-labelled box.

    ``class_distribution`` is optional; when absent, label quality is derived
    from ``score`` (see :func:`ccs.metrics.label_probability`).
    """

    box: BBox
    class_id: int
    score: float
    class_distribution: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        if not (0.0 <= self.score <= 1.0):
            raise ValueError(f"score must lie in [0, 1], got {self.score}")
        if self.class_distribution is not None:
            dist = tuple(float(p) for p in self.class_distribution)
            if any(p < 0 for p in dist) or not math.isclose(sum(dist), 1.0, abs_tol=1e-6):
                raise ValueError("class_distribution must be non-negative and sum to 1")
            object.__setattr__(self, "class_distribution", dist)


# A detection set is simply an ordered sequence of detections for one
# (image, augmentation) pair.
DetectionSet = Sequence[Detection]


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes."""
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    return min(1.0, inter / union)


def boxes_to_array(boxes: Sequence[BBox]) -> np.ndarray:
    """Stack boxes into an ``(N, 4)`` float array."""
    if len(boxes) == 0:
        return np.zeros((0, 4), dtype=float)
    return np.array([b.as_tuple() for b in boxes], dtype=float)


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU between two ``(N, 4)`` and ``(K, 4)`` corner arrays.

    Returns an ``(N, K)`` array. Either input may be empty.
    """
    a = np.asarray(a, dtype=float).reshape(-1, 4)
    b = np.asarray(b, dtype=float).reshape(-1, 4)
    if a.shape[0] == 0 or b.shape[0] == 0:
        return np.zeros((a.shape[0], b.shape[0]), dtype=float)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    iw = np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0])
    ih = np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1])
    inter = np.clip(iw, 0.0, None) * np.clip(ih, 0.0, None)
    union = area_a[:, None] + area_b[None, :] - inter
    return np.minimum(inter / union, 1.0)
