"""Deterministic stand-in detector.

The stub replays ground-truth boxes as detections whose hit probability
and confidence respond linearly to the image's measured features, so the
whole calibrate-enhance-evaluate loop can run without any real model:
planted feature sensitivities must come back out of calibration as the
matching contribution-weight ordering.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .core import FEATURE_NAMES, discover_images, measure_features, read_ground_truth, write_detections
from .errors import SchemaError


@dataclass(frozen=True)
class StubDetectorSpec:
    seed: int = 0
    sensitivity: dict[str, float] = field(default_factory=dict)
    base_recall: float = 1.0
    base_confidence: float = 0.8
    fp_rate: float = 0.0
    confidence_noise: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.base_recall <= 1.0):
            raise SchemaError(f"base_recall {self.base_recall} outside [0, 1]")
        if not (0.0 <= self.base_confidence <= 1.0):
            raise SchemaError(f"base_confidence {self.base_confidence} outside [0, 1]")
        if not (0.0 <= self.fp_rate <= 1.0):
            raise SchemaError(f"fp_rate {self.fp_rate} outside [0, 1]")
        if self.confidence_noise < 0.0:
            raise SchemaError(f"confidence_noise {self.confidence_noise} must be >= 0")
        unknown = set(self.sensitivity) - set(FEATURE_NAMES)
        if unknown:
            raise SchemaError(f"unknown sensitivity features {sorted(unknown)}")

    @classmethod
    def load(cls, path: str | Path) -> "StubDetectorSpec":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise SchemaError(f"{path}: spec must be a JSON object")
        known = {"seed", "sensitivity", "base_recall", "base_confidence", "fp_rate", "confidence_noise"}
        unknown = set(doc) - known
        if unknown:
            raise SchemaError(f"{path}: unknown spec fields {sorted(unknown)}")
        return cls(**doc)


def _clamp(v: float) -> float:
    return min(max(v, 0.0), 1.0)


def _shifted_fp_box(bbox: list[float]) -> list[float]:
    # displaced by its own extent (plus margin) so it cannot match its source
    w = bbox[2] - bbox[0]
    h = bbox[3] - bbox[1]
    return [bbox[0] + w + 2.0, bbox[1] + h + 2.0, bbox[2] + w + 2.0, bbox[3] + h + 2.0]


def run_stub(images_dir: str | Path, gt_file: str | Path, spec: StubDetectorSpec) -> dict:
    """Detections document for every image listed in the ground-truth file.

    A pure function of (spec, images, ground truth): images are visited
    in sorted id order and a single seeded RNG drives every draw.
    """
    gts = read_ground_truth(gt_file)
    available = dict(discover_images(images_dir))
    missing = sorted(set(gts) - set(available))
    if missing:
        raise SchemaError(f"ground-truth ids not found under {images_dir}: {missing[:5]}")
    features = measure_features(images_dir)
    rng = random.Random(spec.seed)
    entries = []
    for img_id in sorted(gts):
        feats = features[img_id]
        lift = sum(coeff * feats[name] for name, coeff in sorted(spec.sensitivity.items()))
        p_detect = _clamp(spec.base_recall + lift)
        detections = []
        for g in gts[img_id]:
            hit = rng.random() < p_detect
            noise = rng.uniform(-spec.confidence_noise, spec.confidence_noise) if spec.confidence_noise else 0.0
            if hit:
                detections.append(
                    {
                        "bbox": list(g["bbox"]),
                        "class": g["class"],
                        "confidence": _clamp(spec.base_confidence + lift + noise),
                    }
                )
            if rng.random() < spec.fp_rate:
                detections.append(
                    {
                        "bbox": _shifted_fp_box(g["bbox"]),
                        "class": g["class"],
                        "confidence": _clamp(0.6 * (spec.base_confidence + lift)),
                    }
                )
        entries.append({"id": img_id, "detections": detections})
    return {"images": entries}


def run_stub_to_file(images_dir: str | Path, gt_file: str | Path, spec: StubDetectorSpec, out: str | Path) -> None:
    write_detections(run_stub(images_dir, gt_file, spec), out)
