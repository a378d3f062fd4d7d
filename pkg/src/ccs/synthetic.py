"""Simulated scenes and detectors for exercising the congruence pipeline.

A scene is a random ground-truth set. A detector profile turns it into
``M`` independently perturbed detection sets (one per augmentation) plus a
baseline set for the un-augmented image. No pixels are involved: the
augmentation effect is modelled directly as per-view detection noise.

Seeds are split with ``numpy.random.SeedSequence([seed, image_index, role])``
so every scene and every detector draw is reproducible on its own.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .congruence import (
    DEFAULT_TAU,
    CongruenceReport,
    DeltaRecord,
    ImageEvaluation,
    Metric,
    YellowRule,
    congruence_report,
    delta_records,
)
from .consensus import AugmentedDetections, ConsensusConfig, compute_ccs, filter_by_score
from .geometry import BBox, Detection
from .metrics import GroundTruthObject, GroundTruthSet, MetricConfig, f1_score, oc_cost, ppdq_image

ROLE_SCENE, ROLE_DET_A, ROLE_DET_B = 0, 1, 2


@dataclass(frozen=True)
class SceneSpec:
    width: float = 640.0
    height: float = 384.0
    min_objects: int = 1
    max_objects: int = 5
    min_size: float = 30.0
    max_size: float = 150.0
    num_classes: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if not (0 <= self.min_objects <= self.max_objects):
            raise ValueError("need 0 <= min_objects <= max_objects")
        if not (0 < self.min_size <= self.max_size):
            raise ValueError("need 0 < min_size <= max_size")
        if self.max_size > min(self.width, self.height):
            raise ValueError("max_size must fit inside the image")
        if self.num_classes < 1:
            raise ValueError("num_classes must be positive")


@dataclass(frozen=True)
class DetectorProfile:
    loc_jitter_sigma: float = 2.0
    miss_prob: float = 0.1
    fp_rate: float = 0.2
    true_score_mean: float = 0.85
    true_score_spread: float = 0.1
    fp_score_mean: float = 0.6
    fp_score_spread: float = 0.15
    class_error_prob: float = 0.0
    # Log-normal spread of a per-image difficulty factor shared by every view
    # of that image; it scales jitter, fp rate and miss odds. 0 disables it.
    difficulty_sigma: float = 1.0
    # Concentration of the Beta prior on each object's per-image detection
    # probability (mean 1 - miss_prob). Low values make misses persistent
    # across views; 0 draws every view independently.
    visibility_concentration: float = 2.0
    # Spurious boxes are latent per image and show up in each view with this
    # probability (per-view count stays Poisson(fp_rate)); 0 draws fresh
    # boxes for every view.
    fp_appearance_prob: float = 0.5

    def __post_init__(self) -> None:
        for name in ("miss_prob", "class_error_prob", "true_score_mean", "fp_score_mean", "fp_appearance_prob"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        for name in ("loc_jitter_sigma", "fp_rate", "true_score_spread", "fp_score_spread", "difficulty_sigma", "visibility_concentration"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @classmethod
    def perfect(cls) -> "DetectorProfile":
        return cls(0.0, 0.0, 0.0, true_score_mean=1.0, true_score_spread=0.0, difficulty_sigma=0.0)

    def scaled(self, difficulty: float) -> "DetectorProfile":
        """Profile for one image of the given difficulty (1 is nominal)."""
        odds = self.miss_prob / (1.0 - self.miss_prob) if self.miss_prob < 1 else float("inf")
        odds *= difficulty
        miss = 1.0 if odds == float("inf") else odds / (1.0 + odds)
        return replace(
            self,
            loc_jitter_sigma=self.loc_jitter_sigma * difficulty,
            fp_rate=self.fp_rate * difficulty,
            miss_prob=miss,
            difficulty_sigma=0.0,
        )


def _rng(*key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(key))))


def _random_box(rng: np.random.Generator, spec: SceneSpec) -> BBox:
    w = rng.uniform(spec.min_size, spec.max_size)
    h = rng.uniform(spec.min_size, spec.max_size)
    x1 = rng.uniform(0.0, spec.width - w)
    y1 = rng.uniform(0.0, spec.height - h)
    return BBox(x1, y1, x1 + w, y1 + h)


def generate_scene(spec: SceneSpec, image_id: str = "img0") -> GroundTruthSet:
    rng = _rng(spec.seed)
    n = int(rng.integers(spec.min_objects, spec.max_objects + 1))
    objects = [
        GroundTruthObject(_random_box(rng, spec), int(rng.integers(spec.num_classes)))
        for _ in range(n)
    ]
    return GroundTruthSet(image_id, tuple(objects))


def _clipped(coords: np.ndarray, spec: SceneSpec) -> Optional[BBox]:
    x1, x2 = sorted(np.clip(coords[[0, 2]], 0.0, spec.width))
    y1, y2 = sorted(np.clip(coords[[1, 3]], 0.0, spec.height))
    if (x2 - x1) * (y2 - y1) < 1.0 or x2 <= x1 or y2 <= y1:
        return None
    return BBox(float(x1), float(y1), float(x2), float(y2))


def _score(rng: np.random.Generator, mean: float, spread: float) -> float:
    return float(np.clip(rng.normal(mean, spread) if spread > 0 else mean, 0.0, 1.0))


@dataclass(frozen=True)
class _LatentState:
    detect_prob: tuple[float, ...]
    hallucinations: tuple[BBox, ...]
    fp_appearance: float


def _latent_state(
    gt: GroundTruthSet, profile: DetectorProfile, spec: SceneSpec, rng: np.random.Generator
) -> _LatentState:
    """Per-image detector state shared by every view of that image."""
    hit = 1.0 - profile.miss_prob
    c = profile.visibility_concentration
    if c > 0 and 0.0 < hit < 1.0:
        probs = tuple(float(p) for p in rng.beta(c * hit, c * (1.0 - hit), size=len(gt)))
    else:
        probs = (hit,) * len(gt)
    q = profile.fp_appearance_prob
    if q > 0:
        boxes = tuple(_random_box(rng, spec) for _ in range(int(rng.poisson(profile.fp_rate / q))))
    else:
        boxes = ()
    return _LatentState(probs, boxes, q)


def _one_view(
    gt: GroundTruthSet,
    profile: DetectorProfile,
    spec: SceneSpec,
    state: _LatentState,
    rng: np.random.Generator,
) -> tuple[Detection, ...]:
    sigma = profile.loc_jitter_sigma
    out = []
    for obj, p in zip(gt.objects, state.detect_prob):
        if rng.random() >= p:
            continue
        coords = np.array(obj.box.as_tuple())
        if sigma > 0:
            coords = coords + rng.normal(0.0, sigma, size=4)
        box = _clipped(coords, spec)
        if box is None:
            continue
        cls = obj.class_id
        if spec.num_classes > 1 and rng.random() < profile.class_error_prob:
            cls = int((cls + rng.integers(1, spec.num_classes)) % spec.num_classes)
        out.append(Detection(box, cls, _score(rng, profile.true_score_mean, profile.true_score_spread)))
    if state.fp_appearance > 0:
        spurious = [b for b in state.hallucinations if rng.random() < state.fp_appearance]
    else:
        spurious = [_random_box(rng, spec) for _ in range(int(rng.poisson(profile.fp_rate)))]
    for base in spurious:
        coords = np.array(base.as_tuple())
        if sigma > 0 and state.fp_appearance > 0:
            coords = coords + rng.normal(0.0, sigma, size=4)
        box = _clipped(coords, spec)
        if box is None:
            continue
        cls = int(rng.integers(spec.num_classes))
        out.append(Detection(box, cls, _score(rng, profile.fp_score_mean, profile.fp_score_spread)))
    return tuple(out)


def simulate_detector(
    gt: GroundTruthSet,
    profile: DetectorProfile,
    m: int,
    seed: int,
    scene: SceneSpec = SceneSpec(),
) -> AugmentedDetections:
    """Detections of one simulated detector on ``m`` augmented views.

    View ``k`` uses stream ``k`` of ``seed``; the baseline (un-augmented)
    view uses stream ``m``, the image difficulty stream ``m + 1`` and the
    latent per-image state stream ``m + 2``.
    """
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    if profile.difficulty_sigma > 0:
        difficulty = float(np.exp(_rng(seed, m + 1).normal(0.0, profile.difficulty_sigma)))
        profile = profile.scaled(difficulty)
    state = _latent_state(gt, profile, scene, _rng(seed, m + 2))
    views = tuple(_one_view(gt, profile, scene, state, _rng(seed, k)) for k in range(m))
    baseline = _one_view(gt, profile, scene, state, _rng(seed, m))
    return AugmentedDetections(gt.image_id, views, baseline)


def evaluate_image(
    ad: AugmentedDetections,
    gt: Optional[GroundTruthSet],
    ccs_cfg: ConsensusConfig,
    metric_cfg: MetricConfig,
) -> ImageEvaluation:
    """CCS from the augmented views, supervised metrics from the baseline view."""
    ccs = compute_ccs(ad, ccs_cfg).ccs
    metrics: dict[Metric, float] = {}
    if gt is not None:
        preds = filter_by_score(ad.baseline or (), ccs_cfg.detection_score_threshold)
        metrics[Metric.F1] = f1_score(preds, gt, metric_cfg).f1
        metrics[Metric.PPDQ] = ppdq_image(preds, gt, metric_cfg)
        metrics[Metric.OC_COST] = oc_cost(preds, gt, metric_cfg)
    return ImageEvaluation(ad.image_id, ccs, metrics)


@dataclass
class ExperimentResult:
    reports: dict[Metric, CongruenceReport]
    records: dict[Metric, list[DeltaRecord]]
    evaluations_a: list[ImageEvaluation]
    evaluations_b: list[ImageEvaluation]
    ground_truth: list[GroundTruthSet] = field(repr=False, default_factory=list)
    detections_a: list[AugmentedDetections] = field(repr=False, default_factory=list)
    detections_b: list[AugmentedDetections] = field(repr=False, default_factory=list)


def run_congruence_experiment(
    n_images: int,
    profile_a: DetectorProfile,
    profile_b: DetectorProfile,
    ccs_cfg: ConsensusConfig = ConsensusConfig(),
    metric_cfg: MetricConfig = MetricConfig(),
    seed: int = 0,
    scene: SceneSpec = SceneSpec(),
    m: int = 9,
    tau: float = DEFAULT_TAU,
    yellow_rule: YellowRule | str = YellowRule.OR,
) -> ExperimentResult:
    """Compare two simulated detectors (A is detector 1) on ``n_images`` scenes."""
    gts, dets_a, dets_b, evals_a, evals_b = [], [], [], [], []
    for idx in range(n_images):
        image_id = f"img{idx:05d}"
        scene_seed = int(np.random.SeedSequence([seed, idx, ROLE_SCENE]).generate_state(1)[0])
        gt = generate_scene(SceneSpec(**{**scene.__dict__, "seed": scene_seed}), image_id)
        ad_a = simulate_detector(gt, profile_a, m, _stream_seed(seed, idx, ROLE_DET_A), scene)
        ad_b = simulate_detector(gt, profile_b, m, _stream_seed(seed, idx, ROLE_DET_B), scene)
        gts.append(gt)
        dets_a.append(ad_a)
        dets_b.append(ad_b)
        evals_a.append(evaluate_image(ad_a, gt, ccs_cfg, metric_cfg))
        evals_b.append(evaluate_image(ad_b, gt, ccs_cfg, metric_cfg))
    records = {
        metric: delta_records(evals_a, evals_b, metric, tau, yellow_rule) for metric in Metric
    }
    reports = {metric: congruence_report(recs, metric) for metric, recs in records.items()}
    return ExperimentResult(reports, records, evals_a, evals_b, gts, dets_a, dets_b)


def _stream_seed(seed: int, idx: int, role: int) -> int:
    return int(np.random.SeedSequence([seed, idx, role]).generate_state(1)[0])
