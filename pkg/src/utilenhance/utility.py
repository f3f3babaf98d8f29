"""Detection-vs-ground-truth evaluation: matching, AP/mAP, per-image
utility quality.

The per-image utility score combines dataset-style mAP with the terms
that actually move for a single image: the miss rate, the weakest
true-positive confidence and the strongest false-positive confidence:

    q = mAP - FN/GT + C_TP - C_FP
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import NoGroundTruth, SchemaError


@dataclass(frozen=True)
class Box:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate box {self}")

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)


@dataclass(frozen=True)
class Detection:
    box: Box
    class_id: str
    confidence: float

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class GroundTruth:
    box: Box
    class_id: str


@dataclass
class ClassMatches:
    """Confidence-ranked match outcomes for one class."""

    ranked: list[tuple[float, bool]] = field(default_factory=list)  # (confidence, is_tp)
    gt_count: int = 0


@dataclass
class MatchReport:
    tp_confidences: list[float]
    fp_confidences: list[float]
    fn_count: int
    gt_count: int
    per_class: dict[str, ClassMatches]


@dataclass(frozen=True)
class UtilityScore:
    q: float
    map: float
    miss_rate: float
    c_tp: float
    c_fp: float


def iou(a: Box, b: Box) -> float:
    """Intersection over union; 0 for disjoint boxes."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if ix <= 0 or iy <= 0:
        return 0.0
    inter = ix * iy
    return inter / (a.area + b.area - inter)


def match_detections(
    dets: list[Detection], gts: list[GroundTruth], iou_threshold: float = 0.5
) -> MatchReport:
    """Greedy per-class matching.

    Detections are visited in descending confidence (ties keep input
    order) and each claims the unmatched same-class ground truth with the
    highest IoU at or above the threshold (IoU ties resolve to the earlier
    ground truth). Claimed pairs are TPs, the rest of the detections FPs,
    unclaimed ground truths FNs.
    """
    if not (0.0 < iou_threshold <= 1.0):
        raise ValueError(f"iou_threshold {iou_threshold} outside (0, 1]")
    classes = sorted({g.class_id for g in gts} | {d.class_id for d in dets})
    per_class: dict[str, ClassMatches] = {}
    tp_confs: list[float] = []
    fp_confs: list[float] = []
    fn_total = 0
    for cls in classes:
        cls_gts = [g for g in gts if g.class_id == cls]
        cls_dets = [d for d in dets if d.class_id == cls]
        cls_dets.sort(key=lambda d: d.confidence, reverse=True)  # stable: ties keep input order
        taken = [False] * len(cls_gts)
        ranked: list[tuple[float, bool]] = []
        for det in cls_dets:
            best_i = -1
            best_iou = 0.0
            for i, gt in enumerate(cls_gts):
                if taken[i]:
                    continue
                v = iou(det.box, gt.box)
                if v >= iou_threshold and v > best_iou:
                    best_i, best_iou = i, v
            if best_i >= 0:
                taken[best_i] = True
                ranked.append((det.confidence, True))
                tp_confs.append(det.confidence)
            else:
                ranked.append((det.confidence, False))
                fp_confs.append(det.confidence)
        fn = taken.count(False)
        fn_total += fn
        per_class[cls] = ClassMatches(ranked=ranked, gt_count=len(cls_gts))
    return MatchReport(
        tp_confidences=tp_confs,
        fp_confidences=fp_confs,
        fn_count=fn_total,
        gt_count=len(gts),
        per_class=per_class,
    )


def pr_points(matches: ClassMatches) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative (recall, precision) pairs along the confidence ranking."""
    if matches.gt_count == 0:
        raise NoGroundTruth("PR curve undefined without ground truth")
    flags = np.array([tp for _, tp in matches.ranked], dtype=np.float64)
    if flags.size == 0:
        return np.array([]), np.array([])
    tp_cum = np.cumsum(flags)
    fp_cum = np.cumsum(1.0 - flags)
    recalls = tp_cum / matches.gt_count
    precisions = tp_cum / (tp_cum + fp_cum)
    return recalls, precisions


def average_precision(recalls, precisions) -> float:
    """All-point interpolated AP over the recall staircase.

    Expects parallel ranking-ordered sequences (recall non-decreasing).
    The interpolated precision at recall r is the max precision attained
    at any recall >= r; AP sums (R_i - R_{i-1}) * P_inter(R_i) from R_0=0.
    """
    r = np.asarray(recalls, dtype=np.float64)
    p = np.asarray(precisions, dtype=np.float64)
    if r.size == 0:
        return 0.0
    if np.any(np.diff(r) < 0):
        raise ValueError("recalls must be non-decreasing (ranking order)")
    p_inter = np.maximum.accumulate(p[::-1])[::-1]
    deltas = np.diff(np.concatenate(([0.0], r)))
    return float(np.sum(deltas * p_inter))


def class_ap(matches: ClassMatches) -> float:
    return average_precision(*pr_points(matches))


def mean_average_precision(report: MatchReport, classes: list[str] | None = None) -> float:
    """Unweighted mean AP over classes holding at least one ground truth."""
    if classes is None:
        classes = sorted(report.per_class)
    scored = [c for c in classes if report.per_class.get(c, ClassMatches()).gt_count > 0]
    if not scored:
        raise NoGroundTruth("mAP undefined: no class has ground truth")
    return float(np.mean([class_ap(report.per_class[c]) for c in scored]))


def utility_score(
    dets: list[Detection], gts: list[GroundTruth], iou_threshold: float = 0.5
) -> UtilityScore:
    """Per-image utility quality q = mAP - FN/GT + C_TP - C_FP.

    C_TP is the smallest TP confidence (0 with no TPs) and C_FP the
    largest FP confidence (0 with no FPs). Images without ground truth
    have no defined score.
    """
    if not gts:
        raise NoGroundTruth("utility score undefined for an image without ground truth")
    report = match_detections(dets, gts, iou_threshold)
    map_value = mean_average_precision(report)
    miss_rate = report.fn_count / report.gt_count
    c_tp = min(report.tp_confidences) if report.tp_confidences else 0.0
    c_fp = max(report.fp_confidences) if report.fp_confidences else 0.0
    return UtilityScore(
        q=map_value - miss_rate + c_tp - c_fp,
        map=map_value,
        miss_rate=miss_rate,
        c_tp=c_tp,
        c_fp=c_fp,
    )


def merge_reports(reports: list[MatchReport]) -> MatchReport:
    """Pool per-image match reports into one dataset-level report.

    Per-class rankings are re-sorted by confidence; ties keep the input
    (image, detection) order, so the merge is deterministic.
    """
    per_class: dict[str, ClassMatches] = {}
    tp_confs: list[float] = []
    fp_confs: list[float] = []
    fn_total = 0
    gt_total = 0
    for rep in reports:
        tp_confs.extend(rep.tp_confidences)
        fp_confs.extend(rep.fp_confidences)
        fn_total += rep.fn_count
        gt_total += rep.gt_count
        for cls, cm in rep.per_class.items():
            dst = per_class.setdefault(cls, ClassMatches())
            dst.ranked.extend(cm.ranked)
            dst.gt_count += cm.gt_count
    for cm in per_class.values():
        cm.ranked.sort(key=lambda pair: pair[0], reverse=True)
    return MatchReport(
        tp_confidences=tp_confs,
        fp_confidences=fp_confs,
        fn_count=fn_total,
        gt_count=gt_total,
        per_class=per_class,
    )


# --- detections / ground-truth file schema ---------------------------------
#
# One JSON document per dataset:
#   {"images": [{"id": "...",
#                "detections": [{"bbox": [x0, y0, x1, y1], "class": "...",
#                                "confidence": 0.9}, ...],
#                "ground_truth": [{"bbox": [...], "class": "..."}, ...]}]}
#
# A detections file must carry "detections" per image; a ground-truth file
# must carry "ground_truth". Confidence is required on detections and
# forbidden on ground truth.


def _parse_box(raw, where: str) -> Box:
    if not isinstance(raw, (list, tuple)) or len(raw) != 4:
        raise SchemaError(f"{where}: bbox must be [x_min, y_min, x_max, y_max]")
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw):
        raise SchemaError(f"{where}: bbox entries must be numbers")
    try:
        return Box(*(float(v) for v in raw))
    except ValueError as exc:
        raise SchemaError(f"{where}: {exc}") from exc


def _load_images_doc(path: str | Path) -> list[dict]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("images"), list):
        raise SchemaError(f"{path}: top level must be {{'images': [...]}}")
    seen = set()
    for i, entry in enumerate(doc["images"]):
        if not isinstance(entry, dict) or not isinstance(entry.get("id"), str):
            raise SchemaError(f"{path}: images[{i}] needs a string 'id'")
        if entry["id"] in seen:
            raise SchemaError(f"{path}: duplicate image id {entry['id']!r}")
        seen.add(entry["id"])
    return doc["images"]


def read_detections_file(path: str | Path) -> dict[str, list[Detection]]:
    out: dict[str, list[Detection]] = {}
    for entry in _load_images_doc(path):
        img_id = entry["id"]
        raw = entry.get("detections")
        if not isinstance(raw, list):
            raise SchemaError(f"{path}: image {img_id!r} lacks a 'detections' list")
        dets = []
        for j, d in enumerate(raw):
            where = f"{path}: image {img_id!r} detections[{j}]"
            if not isinstance(d, dict):
                raise SchemaError(f"{where}: must be an object")
            if not isinstance(d.get("class"), str):
                raise SchemaError(f"{where}: needs a string 'class'")
            conf = d.get("confidence")
            if not isinstance(conf, (int, float)) or isinstance(conf, bool):
                raise SchemaError(f"{where}: needs a numeric 'confidence'")
            if not (0.0 <= conf <= 1.0):
                raise SchemaError(f"{where}: confidence {conf} outside [0, 1]")
            dets.append(Detection(box=_parse_box(d.get("bbox"), where), class_id=d["class"], confidence=float(conf)))
        out[img_id] = dets
    return out


def read_ground_truth_file(path: str | Path) -> dict[str, list[GroundTruth]]:
    out: dict[str, list[GroundTruth]] = {}
    for entry in _load_images_doc(path):
        img_id = entry["id"]
        raw = entry.get("ground_truth")
        if not isinstance(raw, list):
            raise SchemaError(f"{path}: image {img_id!r} lacks a 'ground_truth' list")
        gts = []
        for j, g in enumerate(raw):
            where = f"{path}: image {img_id!r} ground_truth[{j}]"
            if not isinstance(g, dict):
                raise SchemaError(f"{where}: must be an object")
            if "confidence" in g:
                raise SchemaError(f"{where}: confidence is forbidden on ground truth")
            if not isinstance(g.get("class"), str):
                raise SchemaError(f"{where}: needs a string 'class'")
            gts.append(GroundTruth(box=_parse_box(g.get("bbox"), where), class_id=g["class"]))
        out[img_id] = gts
    return out


@dataclass
class DatasetReport:
    map: float
    per_class_ap: dict[str, float]
    per_image: list[tuple[str, UtilityScore]]
    skipped_no_gt: list[str]


def evaluate_dataset(
    dets_by_image: dict[str, list[Detection]],
    gts_by_image: dict[str, list[GroundTruth]],
    iou_threshold: float = 0.5,
) -> DatasetReport:
    """Dataset mAP plus per-image utility scores.

    Matching runs per image; the per-class rankings are then pooled for
    the dataset AP. Images without ground truth are skipped for scoring
    (their q is undefined) but still contribute detections as FPs.
    """
    ids = sorted(set(dets_by_image) | set(gts_by_image))
    reports = []
    per_image: list[tuple[str, UtilityScore]] = []
    skipped: list[str] = []
    for img_id in ids:
        dets = dets_by_image.get(img_id, [])
        gts = gts_by_image.get(img_id, [])
        reports.append(match_detections(dets, gts, iou_threshold))
        if gts:
            per_image.append((img_id, utility_score(dets, gts, iou_threshold)))
        else:
            skipped.append(img_id)
    pooled = merge_reports(reports)
    map_value = mean_average_precision(pooled)
    per_class = {c: class_ap(cm) for c, cm in sorted(pooled.per_class.items()) if cm.gt_count > 0}
    return DatasetReport(map=map_value, per_class_ap=per_class, per_image=per_image, skipped_no_gt=skipped)
