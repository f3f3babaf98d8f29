"""Contribution-dictionary construction.

A dictionary records, per detector, how strongly each correction's paired
feature tracks the per-image utility score (the |PLCC| weight xi), the
feature applicability ranges, and per-correction wall-clock costs.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from statistics import median

import numpy as np

from .corrections import PAIRED_FEATURE, RANK_ORDER, CorrectionKind, CorrectionParams, apply_correction
from .errors import DegenerateInput, SchemaError
from .features import ApplicabilityRanges, FeatureVector
from .imgio import RasterImage
from .utility import UtilityScore

# Reference per-correction seconds (same-resolution, same-device timing of
# the four operators); replaced by measure_time_cost on real deployments.
DEFAULT_TIME_COST = {
    CorrectionKind.CONTRAST: 0.027,
    CorrectionKind.COLOR: 0.033,
    CorrectionKind.BRIGHTNESS: 0.024,
    CorrectionKind.CLARITY: 0.021,
}

BUILTIN_DICTIONARIES = ("yolox", "centernet")


@dataclass(frozen=True)
class ContributionDictionary:
    detector_id: str
    xi: dict[CorrectionKind, float]
    ranges: ApplicabilityRanges = field(default_factory=ApplicabilityRanges)
    time_cost: dict[CorrectionKind, float] = field(default_factory=lambda: dict(DEFAULT_TIME_COST))
    iou_threshold: float = 0.5

    def __post_init__(self):
        for name, table in (("xi", self.xi), ("time_cost", self.time_cost)):
            if set(table) != set(RANK_ORDER):
                raise ValueError(f"{name} must map exactly the four corrections, got {sorted(map(str, table))}")
        for kind, v in self.xi.items():
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"xi[{kind}] = {v} outside [0, 1]")
        for kind, t in self.time_cost.items():
            if not (t > 0):
                raise ValueError(f"time_cost[{kind}] = {t} must be positive")
        if not (0.0 < self.iou_threshold <= 1.0):
            raise ValueError(f"iou_threshold {self.iou_threshold} outside (0, 1]")

    def to_json_dict(self) -> dict:
        return {
            "detector_id": self.detector_id,
            "xi": {str(k): self.xi[k] for k in RANK_ORDER},
            "ranges": self.ranges.as_dict(),
            "time_cost": {str(k): self.time_cost[k] for k in RANK_ORDER},
            "iou_threshold": self.iou_threshold,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    @classmethod
    def from_json_dict(cls, doc: dict, source: str = "<dict>") -> "ContributionDictionary":
        try:
            xi = {CorrectionKind(k): float(v) for k, v in doc["xi"].items()}
            time_cost = {CorrectionKind(k): float(v) for k, v in doc["time_cost"].items()}
            ranges = ApplicabilityRanges(**{k: tuple(v) for k, v in doc["ranges"].items()})
            return cls(
                detector_id=doc["detector_id"],
                xi=xi,
                ranges=ranges,
                time_cost=time_cost,
                iou_threshold=float(doc.get("iou_threshold", 0.5)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{source}: bad contribution dictionary: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "ContributionDictionary":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
        return cls.from_json_dict(doc, source=str(path))


def builtin_dictionary(name: str) -> ContributionDictionary:
    """Load one of the shipped dictionaries ('yolox' or 'centernet')."""
    if name not in BUILTIN_DICTIONARIES:
        raise ValueError(f"unknown builtin dictionary {name!r}, have {BUILTIN_DICTIONARIES}")
    text = resources.files("utilenhance").joinpath(f"dictionaries/{name}.json").read_text()
    return ContributionDictionary.from_json_dict(json.loads(text), source=f"builtin:{name}")


@dataclass(frozen=True)
class CalibrationSample:
    image_id: str
    features: FeatureVector
    utility: UtilityScore


def plcc(s, p) -> float:
    """Pearson linear correlation coefficient between two value lists."""
    s = np.asarray(s, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if s.shape != p.shape or s.ndim != 1:
        raise DegenerateInput(f"need two equal-length 1-d lists, got {s.shape} and {p.shape}")
    n = s.size
    if n < 3:
        raise DegenerateInput(f"need at least 3 samples, got {n}")
    ds = s - s.mean()
    dp = p - p.mean()
    denom = np.sqrt((ds * ds).sum() * (dp * dp).sum())
    if denom == 0.0:
        raise DegenerateInput("zero variance in one of the inputs")
    return float(np.clip((ds * dp).sum() / denom, -1.0, 1.0))


def calibrate(
    samples: list[CalibrationSample],
    time_cost: dict[CorrectionKind, float] | None = None,
    ranges: ApplicabilityRanges | None = None,
    detector_id: str = "calibrated",
    iou_threshold: float = 0.5,
    normalize_sum_to_one: bool = False,
) -> ContributionDictionary:
    """Build a dictionary from (features, utility) samples.

    Each correction's weight is |PLCC| between the per-image q scores and
    its paired feature. The optional sum-to-one renormalization is off by
    default: |PLCC| is already in [0, 1] and the published weights are not
    normalized either.
    """
    if len(samples) < 3:
        raise DegenerateInput(f"need at least 3 calibration samples, got {len(samples)}")
    q = [s.utility.q for s in samples]
    xi: dict[CorrectionKind, float] = {}
    for kind in RANK_ORDER:
        feature_name = PAIRED_FEATURE[kind]
        values = [getattr(s.features, feature_name) for s in samples]
        xi[kind] = abs(plcc(q, values))
    if normalize_sum_to_one:
        total = sum(xi.values())
        if total == 0.0:
            raise DegenerateInput("all contribution weights are zero; cannot normalize")
        xi = {k: v / total for k, v in xi.items()}
    return ContributionDictionary(
        detector_id=detector_id,
        xi=xi,
        ranges=ranges if ranges is not None else ApplicabilityRanges(),
        time_cost=dict(time_cost) if time_cost is not None else dict(DEFAULT_TIME_COST),
        iou_threshold=iou_threshold,
    )


def measure_time_cost(
    images: list[RasterImage],
    params: CorrectionParams | None = None,
    reps: int = 3,
) -> dict[CorrectionKind, float]:
    """Median wall-clock seconds per image for each correction.

    Times every (image, rep) application after one warm-up pass, so the
    result reflects the deployment resolution and machine rather than the
    shipped reference numbers.
    """
    if not images:
        raise ValueError("need at least one image to measure")
    params = params or CorrectionParams()
    out: dict[CorrectionKind, float] = {}
    for kind in RANK_ORDER:
        apply_correction(images[0], kind, params)  # warm-up
        times = []
        for _ in range(reps):
            for img in images:
                t0 = time.perf_counter()
                apply_correction(img, kind, params)
                times.append(time.perf_counter() - t0)
        out[kind] = max(median(times), 1e-9)
    return out
