"""Bounded photometric test-time augmentations.

Nine transforms, none of which moves pixels: box coordinates predicted on
any augmented copy stay comparable with every other copy. Parameters are
drawn uniformly from fixed, narrow intervals, so changing the seed changes
the sampled value but never the maximum strength.

Randomness comes from numpy's PCG64 bit generator seeded through a
``SeedSequence`` of ``(seed, kind code)``; both are portable and stable
across platforms.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy import ndimage


class Kind(str, enum.Enum):
    MILD_BRIGHTNESS = "mild_brightness"
    MILD_CONTRAST = "mild_contrast"
    MILD_BLUR = "mild_blur"
    MILD_NOISE = "mild_noise"
    BRIGHTNESS = "brightness"
    CONTRAST = "contrast"
    NOISE = "noise"
    SHARPEN = "sharpen"
    COLOR_SHIFT = "color_shift"


KINDS: tuple[Kind, ...] = tuple(Kind)

# Uniform sampling intervals per kind and parameter.
RANGES: dict[Kind, dict[str, tuple[float, float]]] = {
    Kind.MILD_BRIGHTNESS: {"alpha": (0.95, 1.05), "beta": (-5.0, 5.0)},
    Kind.BRIGHTNESS: {"alpha": (0.9, 1.1), "beta": (-10.0, 10.0)},
    Kind.MILD_CONTRAST: {"alpha": (0.95, 1.05)},
    Kind.CONTRAST: {"alpha": (0.85, 1.15)},
    Kind.MILD_NOISE: {"sigma": (0.003, 0.005)},
    Kind.NOISE: {"sigma": (0.005, 0.01)},
    Kind.SHARPEN: {"amount": (0.2, 0.5)},
    Kind.COLOR_SHIFT: {"offset": (-8.0, 8.0)},
}
MILD_BLUR_KERNEL = 3
SHARPEN_KERNEL = 3

_KIND_CODE = {k: i for i, k in enumerate(KINDS)}


@dataclass(frozen=True)
class AugmentationSpec:
    kind: Kind
    params: dict[str, Any]
    seed: int

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "params": self.params, "seed": self.seed}


def _rng(seed: int, kind: Kind, stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, _KIND_CODE[kind], stream])
    return np.random.Generator(np.random.PCG64(ss))


def sample_spec(kind: Kind | str, seed: int) -> AugmentationSpec:
    """Draw parameters for one transform; deterministic in ``(kind, seed)``."""
    kind = Kind(kind)
    rng = _rng(seed, kind, 0)
    params: dict[str, Any] = {}
    if kind is Kind.MILD_BLUR:
        params["kernel"] = MILD_BLUR_KERNEL
    elif kind is Kind.COLOR_SHIFT:
        lo, hi = RANGES[kind]["offset"]
        params["offset"] = [float(v) for v in rng.uniform(lo, hi, size=3)]
    else:
        for name, (lo, hi) in RANGES[kind].items():
            params[name] = float(rng.uniform(lo, hi))
    if kind is Kind.SHARPEN:
        params["kernel"] = SHARPEN_KERNEL
    return AugmentationSpec(kind, params, seed)


def _to_uint8(x: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(x), 0, 255).astype(np.uint8)


def _box_blur(x: np.ndarray, size: int) -> np.ndarray:
    return ndimage.uniform_filter(x, size=(size, size, 1), mode="reflect")


def apply(img: np.ndarray, spec: AugmentationSpec) -> np.ndarray:
    """Apply one transform to an ``(H, W, 3)`` uint8 image.

    The output has the same shape and dtype; values are rounded and clamped
    to ``[0, 255]``.
    """
    img = np.asarray(img)
    if img.ndim != 3 or img.shape[2] != 3 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"expected an (H, W, 3) image, got shape {img.shape}")
    x = img.astype(np.float64)
    p = spec.params
    kind = spec.kind
    if kind in (Kind.BRIGHTNESS, Kind.MILD_BRIGHTNESS):
        y = p["alpha"] * x + p["beta"]
    elif kind in (Kind.CONTRAST, Kind.MILD_CONTRAST):
        # Stretch about the mean intensity: y = a*x + (1 - a)*mean.
        y = p["alpha"] * x + (1.0 - p["alpha"]) * x.mean()
    elif kind in (Kind.NOISE, Kind.MILD_NOISE):
        rng = _rng(spec.seed, kind, 2)
        y = x + rng.normal(0.0, p["sigma"] * 255.0, size=x.shape)
    elif kind is Kind.MILD_BLUR:
        y = _box_blur(x, int(p["kernel"]))
    elif kind is Kind.SHARPEN:
        y = x + p["amount"] * (x - _box_blur(x, int(p["kernel"])))
    elif kind is Kind.COLOR_SHIFT:
        y = x + np.asarray(p["offset"], dtype=float)[None, None, :]
    else:  # pragma: no cover
        raise ValueError(f"unknown augmentation kind {kind}")
    return _to_uint8(y)


@dataclass
class AugmentationBatch:
    images: list[np.ndarray]
    specs: list[AugmentationSpec] = field(default_factory=list)

    def manifest(self, stem: str = "image") -> list[dict]:
        return [
            {"file": output_name(stem, k, s.kind), "index": k, **s.to_json()}
            for k, s in enumerate(self.specs)
        ]


def output_name(stem: str, index: int, kind: Kind) -> str:
    return f"{stem}__aug{index}_{kind.value}.png"


def augment_all(img: np.ndarray, seed: int) -> AugmentationBatch:
    """All nine transforms of ``img``, in catalogue order."""
    specs = [sample_spec(kind, seed) for kind in KINDS]
    return AugmentationBatch([apply(img, s) for s in specs], specs)
