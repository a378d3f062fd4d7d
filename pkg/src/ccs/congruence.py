"""Two-detector congruence analysis between CCS and a supervised metric."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Optional, Sequence

import numpy as np

DEFAULT_TAU = 0.15


class Metric(str, enum.Enum):
    F1 = "f1"
    PPDQ = "ppdq"
    OC_COST = "oc_cost"

    @property
    def lower_is_better(self) -> bool:
        return self is Metric.OC_COST


class Dot(str, enum.Enum):
    BLUE = "blue"      # both deltas favour detector 1
    GREEN = "green"    # both deltas favour detector 2
    RED = "red"        # the two signals disagree
    YELLOW = "yellow"  # near-tie, excluded


class YellowRule(str, enum.Enum):
    OR = "or"
    AND = "and"


@dataclass(frozen=True)
class ImageEvaluation:
    image_id: Hashable
    ccs: float
    metrics: Mapping[Metric, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        metrics: dict[Metric, float] = {}
        for key, value in dict(self.metrics).items():
            key = Metric(key)
            if key in metrics:
                raise ValueError(f"duplicate metric {key.value} for image {self.image_id!r}")
            metrics[key] = float(value)
        object.__setattr__(self, "metrics", metrics)


@dataclass(frozen=True)
class DeltaRecord:
    image_id: Hashable
    delta_metric: float
    delta_ccs: float
    dot: Dot


@dataclass
class CongruenceReport:
    metric: Metric
    total_images: int
    yellow: int
    considered: int
    green: int
    blue: int
    red: int
    congruence_pct: Optional[float]
    spearman_rho: Optional[float]
    sorted_trend: list[tuple[float, float]]

    def summary(self) -> dict:
        return {
            "metric": self.metric.value,
            "total_images": self.total_images,
            "yellow": self.yellow,
            "considered": self.considered,
            "green": self.green,
            "blue": self.blue,
            "red": self.red,
            "congruence_pct": self.congruence_pct,
            "spearman_rho": self.spearman_rho,
        }


def deltas(eval1: ImageEvaluation, eval2: ImageEvaluation, metric: Metric | str) -> tuple[float, float]:
    """Metric and CCS deltas (detector 1 minus detector 2).

    For lower-is-better metrics the metric delta is negated, so a positive
    value always means detector 1 did better.
    """
    metric = Metric(metric)
    for ev in (eval1, eval2):
        if metric not in ev.metrics:
            raise KeyError(f"image {ev.image_id!r} has no {metric.value} value")
    dm = eval1.metrics[metric] - eval2.metrics[metric]
    if metric.lower_is_better:
        dm = -dm
    return dm, eval1.ccs - eval2.ccs


def classify_dot(
    d_metric: float,
    d_ccs: float,
    tau: float = DEFAULT_TAU,
    rule: YellowRule | str = YellowRule.OR,
) -> Dot:
    if tau < 0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    inside_m = abs(d_metric) <= tau
    inside_c = abs(d_ccs) <= tau
    if YellowRule(rule) is YellowRule.OR:
        tie = inside_m or inside_c
    else:
        tie = inside_m and inside_c
    if tie:
        return Dot.YELLOW
    if d_metric > 0 and d_ccs > 0:
        return Dot.BLUE
    if d_metric < 0 and d_ccs < 0:
        return Dot.GREEN
    return Dot.RED


def delta_records(
    evals1: Sequence[ImageEvaluation],
    evals2: Sequence[ImageEvaluation],
    metric: Metric | str,
    tau: float = DEFAULT_TAU,
    rule: YellowRule | str = YellowRule.OR,
) -> list[DeltaRecord]:
    """Pair evaluations by position; image ids must line up."""
    if len(evals1) != len(evals2):
        raise ValueError("evaluation lists differ in length")
    out = []
    for e1, e2 in zip(evals1, evals2):
        if e1.image_id != e2.image_id:
            raise ValueError(f"image id mismatch: {e1.image_id!r} vs {e2.image_id!r}")
        dm, dc = deltas(e1, e2, metric)
        out.append(DeltaRecord(e1.image_id, dm, dc, classify_dot(dm, dc, tau, rule)))
    return out


def rank_average(x: Sequence[float]) -> np.ndarray:
    """1-based ranks; tied values share the mean of their positions."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(len(x), dtype=float)
    sx = x[order]
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman_rho(pairs: Iterable[tuple[float, float]]) -> Optional[float]:
    """Spearman's rank correlation with average ranks for ties.

    Returns None for fewer than two pairs or when either rank vector is
    constant.
    """
    pairs = list(pairs)
    if len(pairs) < 2:
        return None
    rx = rank_average([p[0] for p in pairs])
    ry = rank_average([p[1] for p in pairs])
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0 or syy == 0:
        return None
    rho = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, rho))


def congruence_report(records: Sequence[DeltaRecord], metric: Metric | str = Metric.F1) -> CongruenceReport:
    counts = {dot: 0 for dot in Dot}
    for r in records:
        counts[r.dot] += 1
    considered = len(records) - counts[Dot.YELLOW]
    agree = counts[Dot.GREEN] + counts[Dot.BLUE]
    pct = 100.0 * agree / considered if considered > 0 else None
    decisive = [(r.delta_metric, r.delta_ccs) for r in records if r.dot in (Dot.GREEN, Dot.BLUE)]
    trend = sorted(decisive, key=lambda p: p[0])
    return CongruenceReport(
        metric=Metric(metric),
        total_images=len(records),
        yellow=counts[Dot.YELLOW],
        considered=considered,
        green=counts[Dot.GREEN],
        blue=counts[Dot.BLUE],
        red=counts[Dot.RED],
        congruence_pct=pct,
        spearman_rho=spearman_rho(trend),
        sorted_trend=trend,
    )
