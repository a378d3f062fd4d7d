"""Newline-delimited JSON detection and ground-truth files, plus CSV output.

Detection file, one record per line::

    {"image_id": "000123", "augmentation_index": 0,
     "detections": [{"bbox": [x1, y1, x2, y2], "class_id": 1, "score": 0.91,
                     "class_distribution": [0.09, 0.91]}]}

``augmentation_index`` -1 marks the un-augmented image. Ground-truth file::

    {"image_id": "000123", "objects": [{"bbox": [x1, y1, x2, y2], "class_id": 1}]}

Floats are written with ``repr`` (shortest round-tripping form).
"""
from __future__ import annotations

import csv
import json
import math
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from .consensus import AugmentedDetections
from .geometry import BBox, Detection, InvalidBoxError
from .metrics import GroundTruthObject, GroundTruthSet

BASELINE_INDEX = -1


class SchemaError(ValueError):
    """Malformed input file; ``line`` is 1-based."""

    def __init__(self, path: str, line: int, message: str) -> None:
        super().__init__(f"{path}:{line}: {message}")
        self.path = path
        self.line = line


@dataclass(frozen=True)
class DetectionRecord:
    image_id: str
    augmentation_index: int
    detections: tuple[Detection, ...]


def xywh_to_xyxy(x: float, y: float, w: float, h: float) -> tuple[float, float, float, float]:
    return (x, y, x + w, y + h)


def xyxy_to_xywh(x1: float, y1: float, x2: float, y2: float) -> tuple[float, float, float, float]:
    return (x1, y1, x2 - x1, y2 - y1)


# -- parsing -----------------------------------------------------------------


def _is_number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _is_int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _parse_box(raw: Any) -> BBox:
    if not isinstance(raw, list) or len(raw) != 4 or not all(_is_number(v) for v in raw):
        raise ValueError(f"bbox must be a list of 4 finite numbers, got {raw!r}")
    try:
        return BBox(*(float(v) for v in raw))
    except InvalidBoxError as exc:
        raise ValueError(str(exc)) from None


def _parse_detection(raw: Any) -> Detection:
    if not isinstance(raw, dict):
        raise ValueError("detection must be an object")
    box = _parse_box(raw.get("bbox"))
    cls = raw.get("class_id")
    if not _is_int(cls) or cls < 0:
        raise ValueError(f"class_id must be a non-negative integer, got {cls!r}")
    score = raw.get("score")
    if not _is_number(score) or not 0.0 <= score <= 1.0:
        raise ValueError(f"score must be a number in [0, 1], got {score!r}")
    dist = raw.get("class_distribution")
    if dist is not None:
        if not isinstance(dist, list) or not all(_is_number(p) for p in dist):
            raise ValueError("class_distribution must be a list of numbers")
        dist = tuple(float(p) for p in dist)
    return Detection(box, cls, float(score), dist)


def _records(path: Path) -> Iterable[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(str(path), lineno, f"invalid JSON: {exc.msg}") from None
            if not isinstance(rec, dict):
                raise SchemaError(str(path), lineno, "record must be a JSON object")
            yield lineno, rec


def read_detections(path: str | Path) -> list[DetectionRecord]:
    path = Path(path)
    out: list[DetectionRecord] = []
    seen: dict[tuple[str, int], int] = {}
    for lineno, rec in _records(path):
        image_id = rec.get("image_id")
        if not isinstance(image_id, str) or not image_id:
            raise SchemaError(str(path), lineno, "image_id must be a non-empty string")
        aug = rec.get("augmentation_index")
        if not _is_int(aug) or aug < BASELINE_INDEX:
            raise SchemaError(
                str(path), lineno, f"image {image_id!r}: augmentation_index must be an integer >= -1"
            )
        key = (image_id, aug)
        if key in seen:
            raise SchemaError(
                str(path), lineno,
                f"duplicate record for image {image_id!r} augmentation {aug} (first on line {seen[key]})",
            )
        seen[key] = lineno
        raw = rec.get("detections")
        if not isinstance(raw, list):
            raise SchemaError(str(path), lineno, f"image {image_id!r}: detections must be a list")
        try:
            dets = tuple(_parse_detection(d) for d in raw)
        except ValueError as exc:
            raise SchemaError(str(path), lineno, f"image {image_id!r}: {exc}") from None
        out.append(DetectionRecord(image_id, aug, dets))
    return out


def read_ground_truth(path: str | Path) -> list[GroundTruthSet]:
    path = Path(path)
    out: list[GroundTruthSet] = []
    seen: dict[str, int] = {}
    for lineno, rec in _records(path):
        image_id = rec.get("image_id")
        if not isinstance(image_id, str) or not image_id:
            raise SchemaError(str(path), lineno, "image_id must be a non-empty string")
        if image_id in seen:
            raise SchemaError(
                str(path), lineno, f"duplicate image {image_id!r} (first on line {seen[image_id]})"
            )
        seen[image_id] = lineno
        raw = rec.get("objects")
        if not isinstance(raw, list):
            raise SchemaError(str(path), lineno, f"image {image_id!r}: objects must be a list")
        objects = []
        for o in raw:
            try:
                if not isinstance(o, dict):
                    raise ValueError("object must be a JSON object")
                box = _parse_box(o.get("bbox"))
                cls = o.get("class_id")
                if not _is_int(cls) or cls < 0:
                    raise ValueError(f"class_id must be a non-negative integer, got {cls!r}")
            except ValueError as exc:
                raise SchemaError(str(path), lineno, f"image {image_id!r}: {exc}") from None
            objects.append(GroundTruthObject(box, cls))
        out.append(GroundTruthSet(image_id, tuple(objects)))
    return out


# -- grouping ----------------------------------------------------------------


@dataclass
class ImageDetections:
    image_id: str
    views: dict[int, tuple[Detection, ...]]

    def augmented(self, m: Optional[int] = None) -> AugmentedDetections:
        """Views ``0..m-1`` as :class:`AugmentedDetections`.

        ``m`` defaults to one past the largest index present. Raises
        ``ValueError`` naming the missing indices.
        """
        indices = sorted(k for k in self.views if k >= 0)
        if m is None:
            m = indices[-1] + 1 if indices else 0
        missing = [k for k in range(m) if k not in self.views]
        if missing:
            raise ValueError(f"missing augmentation indices {missing}")
        extra = [k for k in indices if k >= m]
        if extra:
            raise ValueError(f"unexpected augmentation indices {extra} (expected {m})")
        if m < 2:
            raise ValueError(f"need at least 2 augmentations, found {m}")
        return AugmentedDetections(
            self.image_id,
            tuple(self.views[k] for k in range(m)),
            self.views.get(BASELINE_INDEX),
        )

    @property
    def baseline(self) -> tuple[Detection, ...]:
        return self.views.get(BASELINE_INDEX, ())


def group_by_image(records: Sequence[DetectionRecord]) -> "OrderedDict[str, ImageDetections]":
    """Group records by image, in order of first appearance."""
    out: OrderedDict[str, ImageDetections] = OrderedDict()
    for r in records:
        out.setdefault(r.image_id, ImageDetections(r.image_id, {})).views[r.augmentation_index] = r.detections
    return out


# -- writing -----------------------------------------------------------------


def _detection_json(d: Detection) -> dict:
    out: dict[str, Any] = {
        "bbox": list(d.box.as_tuple()),
        "class_id": d.class_id,
        "score": d.score,
    }
    if d.class_distribution is not None:
        out["class_distribution"] = list(d.class_distribution)
    return out


def write_detections(path: str | Path, records: Iterable[DetectionRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            rec = {
                "image_id": r.image_id,
                "augmentation_index": r.augmentation_index,
                "detections": [_detection_json(d) for d in r.detections],
            }
            fh.write(json.dumps(rec) + "\n")


def write_ground_truth(path: str | Path, sets: Iterable[GroundTruthSet]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for g in sets:
            rec = {
                "image_id": str(g.image_id),
                "objects": [{"bbox": list(o.box.as_tuple()), "class_id": o.class_id} for o in g.objects],
            }
            fh.write(json.dumps(rec) + "\n")


def records_from_augmented(ad: AugmentedDetections) -> list[DetectionRecord]:
    out = []
    if ad.baseline is not None:
        out.append(DetectionRecord(str(ad.image_id), BASELINE_INDEX, tuple(ad.baseline)))
    for k, dets in enumerate(ad.per_augmentation):
        out.append(DetectionRecord(str(ad.image_id), k, tuple(dets)))
    return out


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])


def write_json(path: str | Path, obj: Any) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
