"""Cumulative Consensus Score over test-time augmentations.

For every ordered pair of augmentations ``(i, j)`` the boxes of ``i`` are
compared with the boxes of ``j``: IoUs below ``beta`` are zeroed, each row
keeps its maximum, and the row maxima are summed and divided by ``kappa_i``
to give the pairwise consensus ``gamma[i, j]``. The per-image score is the
mean of ``gamma`` over all ``M * (M - 1)`` ordered pairs.

Class labels are ignored throughout; every box is compared with every box.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Hashable, Optional, Sequence

import numpy as np

from .geometry import Detection, DetectionSet, boxes_to_array, iou_matrix


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


class KappaMode(str, enum.Enum):
    CONSTANT_ONE = "constant_one"
    CONSTANT_N0 = "constant_n0"
    PER_AUGMENTATION_NI = "per_augmentation_ni"


@dataclass(frozen=True)
class ConsensusConfig:
    beta: float = 0.5
    kappa_mode: KappaMode = KappaMode.PER_AUGMENTATION_NI
    detection_score_threshold: float = 0.5
    # Only used to count the baseline boxes in CONSTANT_N0 mode.
    n0_score_threshold: float = 0.25
    # Expected augmentation count; None accepts any M >= 2.
    m: Optional[int] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kappa_mode", KappaMode(self.kappa_mode))
        if not (0.0 <= self.beta <= 1.0):
            raise ConfigError(f"beta must lie in [0, 1], got {self.beta}")
        for name in ("detection_score_threshold", "n0_score_threshold"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ConfigError(f"{name} must lie in [0, 1], got {v}")
        if self.n0_score_threshold > self.detection_score_threshold:
            raise ConfigError("n0_score_threshold must not exceed detection_score_threshold")
        if self.m is not None and self.m < 2:
            raise ConfigError(f"m must be >= 2, got {self.m}")


@dataclass(frozen=True)
class AugmentedDetections:
    """Detections of one image under ``M`` augmentations.

    ``baseline`` holds the detections on the un-augmented image; it is only
    consulted for ``KappaMode.CONSTANT_N0``.
    """

    image_id: Hashable
    per_augmentation: tuple[tuple[Detection, ...], ...]
    baseline: Optional[tuple[Detection, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "per_augmentation", tuple(tuple(d) for d in self.per_augmentation)
        )
        if self.baseline is not None:
            object.__setattr__(self, "baseline", tuple(self.baseline))

    @property
    def m(self) -> int:
        return len(self.per_augmentation)


@dataclass
class CcsResult:
    image_id: Hashable
    ccs: float
    # M x M, NaN on the diagonal.
    gamma: np.ndarray
    kappa: tuple[float, ...]
    per_pair_detail: Optional[dict[tuple[int, int], np.ndarray]] = field(default=None, repr=False)


def filter_by_score(dets: DetectionSet, threshold: float) -> list[Detection]:
    return [d for d in dets if d.score >= threshold]


def build_iou_matrix(di: DetectionSet, dj: DetectionSet) -> np.ndarray:
    """IoU of every box in ``di`` (rows) against every box in ``dj`` (columns)."""
    return iou_matrix(
        boxes_to_array([d.box for d in di]), boxes_to_array([d.box for d in dj])
    )


def threshold_matrix(m: np.ndarray, beta: float) -> np.ndarray:
    """Zero every entry below ``beta``; entries equal to ``beta`` are kept."""
    m = np.asarray(m, dtype=float)
    return np.where(m >= beta, m, 0.0)


def row_max(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.shape[1] == 0:
        raise ValueError("row_max needs at least one column")
    return m.max(axis=1)


def pairwise_consensus(
    di: DetectionSet, dj: DetectionSet, cfg: ConsensusConfig, kappa_i: float
) -> float:
    """Consensus of augmentation ``i`` with augmentation ``j``.

    ``di`` and ``dj`` are used as given; score filtering is the caller's job.
    Returns 0 when either side is empty.
    """
    if len(di) == 0 or len(dj) == 0:
        return 0.0
    if kappa_i <= 0:
        raise ValueError(f"kappa_i must be positive, got {kappa_i}")
    maxima = row_max(threshold_matrix(build_iou_matrix(di, dj), cfg.beta))
    return float(maxima.sum()) / kappa_i


def resolve_kappa(ad: AugmentedDetections, i: int, cfg: ConsensusConfig) -> int:
    """Normalisation divisor for augmentation ``i``.

    In PER_AUGMENTATION_NI mode this is the filtered box count and may be 0;
    :func:`pairwise_consensus` is never divided by it in that case.
    """
    mode = cfg.kappa_mode
    if mode is KappaMode.CONSTANT_ONE:
        return 1
    if mode is KappaMode.CONSTANT_N0:
        if ad.baseline is None:
            raise ConfigError(
                f"kappa mode {mode.value} needs baseline detections for image {ad.image_id!r}"
            )
        return max(1, len(filter_by_score(ad.baseline, cfg.n0_score_threshold)))
    return len(filter_by_score(ad.per_augmentation[i], cfg.detection_score_threshold))


def compute_ccs(
    ad: AugmentedDetections, cfg: ConsensusConfig, keep_detail: bool = False
) -> CcsResult:
    """Per-image CCS averaged over all ordered augmentation pairs."""
    m = ad.m
    if m < 2:
        raise ValueError(f"CCS needs at least 2 augmentations, got {m}")
    if cfg.m is not None and m != cfg.m:
        raise ValueError(f"image {ad.image_id!r}: expected {cfg.m} augmentations, got {m}")

    kept = [filter_by_score(d, cfg.detection_score_threshold) for d in ad.per_augmentation]
    kappa = [resolve_kappa(ad, i, cfg) for i in range(m)]
    counts = [len(k) for k in kept]

    # One IoU matrix over all boxes; each (i, j) pair is a block of it.
    offsets = np.concatenate([[0], np.cumsum(counts)])
    allboxes = boxes_to_array([d.box for dets in kept for d in dets])
    filtered = threshold_matrix(iou_matrix(allboxes, allboxes), cfg.beta)

    gamma = np.full((m, m), np.nan)
    detail: Optional[dict[tuple[int, int], np.ndarray]] = {} if keep_detail else None
    total = 0.0
    for i in range(m):
        ri = slice(offsets[i], offsets[i + 1])
        for j in range(m):
            if i == j:
                continue
            if counts[i] == 0 or counts[j] == 0:
                g = 0.0
                if detail is not None:
                    detail[(i, j)] = np.zeros(counts[i])
            else:
                maxima = filtered[ri, offsets[j]:offsets[j + 1]].max(axis=1)
                g = float(maxima.sum()) / kappa[i]
                if detail is not None:
                    detail[(i, j)] = maxima
            gamma[i, j] = g
            total += g
    return CcsResult(
        image_id=ad.image_id,
        ccs=total / (m * (m - 1)),
        gamma=gamma,
        kappa=tuple(kappa),
        per_pair_detail=detail,
    )


def compute_ccs_many(
    items: Sequence[AugmentedDetections], cfg: ConsensusConfig, threads: int = 1
) -> list[CcsResult]:
    """Evaluate many images, optionally on a thread pool; output order follows input."""
    if threads <= 1 or len(items) < 2:
        return [compute_ccs(ad, cfg) for ad in items]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda ad: compute_ccs(ad, cfg), items))
