"""Shared plumbing: the detections-file schema, image discovery, and the
feature measurements obtained through the utilenhance CLI.

The enhancement toolkit is consumed strictly through its public command
line and file formats; nothing is imported from it.
"""

from __future__ import annotations

import csv
import json
import os
import shlex
import subprocess
import sys
import tempfile
from pathlib import Path

from .errors import SchemaError, SubprocessFailure

IMAGE_SUFFIXES = {".png", ".ppm"}

FEATURE_NAMES = ("gradient", "saturation", "entropy", "brightness")


def enhancer_command() -> list[str]:
    """Command prefix for the utilenhance CLI (override with UTILENHANCE_BIN)."""
    override = os.environ.get("UTILENHANCE_BIN")
    if override:
        return shlex.split(override)
    return [sys.executable, "-m", "utilenhance.cli"]


def discover_images(images_dir: str | Path) -> list[tuple[str, Path]]:
    """Sorted (image id, path) pairs; ids are extension-less relative paths,
    matching the enhancement pipeline's convention."""
    root = Path(images_dir)
    if not root.is_dir():
        raise SchemaError(f"image directory {images_dir!r} does not exist")
    pairs = []
    for p in sorted(root.rglob("*")):
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES:
            rel = p.relative_to(root).as_posix()
            pairs.append((rel.rsplit(".", 1)[0], p))
    return pairs


def measure_features(images_dir: str | Path) -> dict[str, dict[str, float]]:
    """Per-image feature values via `utilenhance features`."""
    with tempfile.TemporaryDirectory() as tmp:
        out_csv = Path(tmp) / "features.csv"
        cmd = enhancer_command() + ["features", "--in", str(images_dir), "--out", str(out_csv)]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        if proc.returncode != 0:
            raise SubprocessFailure(
                f"feature extraction failed (exit {proc.returncode}): {proc.stderr.strip()}"
            )
        features: dict[str, dict[str, float]] = {}
        with out_csv.open() as fh:
            for row in csv.DictReader(fh):
                img_id = row["path"].rsplit(".", 1)[0]
                features[img_id] = {name: float(row[name]) for name in FEATURE_NAMES}
    return features


def read_ground_truth(path: str | Path) -> dict[str, list[dict]]:
    """Ground-truth boxes per image id from a dataset JSON document."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("images"), list):
        raise SchemaError(f"{path}: top level must be {{'images': [...]}}")
    out: dict[str, list[dict]] = {}
    for i, entry in enumerate(doc["images"]):
        if not isinstance(entry, dict) or not isinstance(entry.get("id"), str):
            raise SchemaError(f"{path}: images[{i}] needs a string 'id'")
        boxes = entry.get("ground_truth")
        if not isinstance(boxes, list):
            raise SchemaError(f"{path}: image {entry['id']!r} lacks a 'ground_truth' list")
        for j, g in enumerate(boxes):
            _check_box(g, f"{path}: image {entry['id']!r} ground_truth[{j}]", confidence=False)
        out[entry["id"]] = boxes
    return out


def _check_box(obj, where: str, confidence: bool) -> None:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: must be an object")
    bbox = obj.get("bbox")
    if (
        not isinstance(bbox, (list, tuple))
        or len(bbox) != 4
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in bbox)
    ):
        raise SchemaError(f"{where}: bbox must be four numbers")
    if not (bbox[0] < bbox[2] and bbox[1] < bbox[3]):
        raise SchemaError(f"{where}: bbox corners must satisfy x_min < x_max and y_min < y_max")
    if not isinstance(obj.get("class"), str):
        raise SchemaError(f"{where}: needs a string 'class'")
    if confidence:
        conf = obj.get("confidence")
        if not isinstance(conf, (int, float)) or isinstance(conf, bool) or not (0.0 <= conf <= 1.0):
            raise SchemaError(f"{where}: needs a numeric 'confidence' in [0, 1]")
    elif "confidence" in obj:
        raise SchemaError(f"{where}: confidence is forbidden on ground truth")


def validate_detections_doc(doc: dict, source: str = "<output>") -> None:
    """Assert a document matches the detections schema the evaluator reads."""
    if not isinstance(doc, dict) or not isinstance(doc.get("images"), list):
        raise SchemaError(f"{source}: top level must be {{'images': [...]}}")
    seen = set()
    for i, entry in enumerate(doc["images"]):
        if not isinstance(entry, dict) or not isinstance(entry.get("id"), str):
            raise SchemaError(f"{source}: images[{i}] needs a string 'id'")
        if entry["id"] in seen:
            raise SchemaError(f"{source}: duplicate image id {entry['id']!r}")
        seen.add(entry["id"])
        dets = entry.get("detections")
        if not isinstance(dets, list):
            raise SchemaError(f"{source}: image {entry['id']!r} lacks a 'detections' list")
        for j, d in enumerate(dets):
            _check_box(d, f"{source}: image {entry['id']!r} detections[{j}]", confidence=True)


def write_detections(doc: dict, path: str | Path) -> None:
    validate_detections_doc(doc, source=str(path))
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
