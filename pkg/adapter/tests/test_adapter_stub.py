"""Stub detector behavior: echo mode, determinism, feature sensitivity."""

import csv
import json

import pytest

from detadapter import SchemaError, StubDetectorSpec, run_stub
from detadapter.cli import main
from detadapter.core import validate_detections_doc

from _adapter_fixtures import make_dataset, run_enhancer


def test_zero_sensitivity_echoes_ground_truth(tmp_path, enhancer_available):
    images, gt_path = make_dataset(tmp_path, n=4, boxes_per_image=2)
    spec = StubDetectorSpec(seed=3, base_recall=1.0, base_confidence=0.8, fp_rate=0.0)
    doc = run_stub(images, gt_path, spec)
    gt_doc = json.loads(gt_path.read_text())
    assert [e["id"] for e in doc["images"]] == [e["id"] for e in gt_doc["images"]]
    for got, want in zip(doc["images"], gt_doc["images"]):
        assert [d["bbox"] for d in got["detections"]] == [g["bbox"] for g in want["ground_truth"]]
        assert [d["class"] for d in got["detections"]] == [g["class"] for g in want["ground_truth"]]
        assert all(d["confidence"] == 0.8 for d in got["detections"])


def test_same_seed_identical_output_file(tmp_path, enhancer_available):
    images, gt_path = make_dataset(tmp_path, n=5)
    spec_doc = {"seed": 9, "base_recall": 0.6, "base_confidence": 0.5, "fp_rate": 0.3,
                "sensitivity": {"gradient": 3.0}, "confidence_noise": 0.05}
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps(spec_doc))
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        code = main(["stub", "--gt", str(gt_path), "--images", str(images), "--spec", str(spec_path), "--out", str(out)])
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_output_validates_and_evaluates(tmp_path, enhancer_available):
    images, gt_path = make_dataset(tmp_path, n=6)
    out = tmp_path / "dets.json"
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(json.dumps({"seed": 1, "base_recall": 0.7, "base_confidence": 0.6, "fp_rate": 0.4}))
    assert main(["stub", "--gt", str(gt_path), "--images", str(images), "--spec", str(spec_path), "--out", str(out)]) == 0
    validate_detections_doc(json.loads(out.read_text()), source=str(out))
    # the real consumer accepts the file
    proc = run_enhancer("evaluate", "--dets", str(out), "--gt", str(gt_path))
    assert proc.returncode == 0, proc.stderr
    assert "dataset mAP" in proc.stdout


def test_fp_rate_injects_unmatched_boxes(tmp_path, enhancer_available):
    images, gt_path = make_dataset(tmp_path, n=8, boxes_per_image=1)
    spec = StubDetectorSpec(seed=5, base_recall=1.0, base_confidence=0.8, fp_rate=1.0)
    doc = run_stub(images, gt_path, spec)
    for entry in doc["images"]:
        assert len(entry["detections"]) == 2  # one hit + one forced FP
        tp, fp = entry["detections"]
        assert fp["bbox"][0] > tp["bbox"][0]  # shifted copy cannot overlap
        assert fp["confidence"] < tp["confidence"]


def test_missing_image_id_fails(tmp_path, enhancer_available):
    images, gt_path = make_dataset(tmp_path, n=2)
    doc = json.loads(gt_path.read_text())
    doc["images"].append({"id": "ghost", "ground_truth": []})
    gt_path.write_text(json.dumps(doc))
    with pytest.raises(SchemaError):
        run_stub(images, gt_path, StubDetectorSpec())


def test_spec_validation(tmp_path):
    with pytest.raises(SchemaError):
        StubDetectorSpec(base_recall=1.4)
    with pytest.raises(SchemaError):
        StubDetectorSpec(sensitivity={"sharpness": 1.0})
    bad = tmp_path / "spec.json"
    bad.write_text(json.dumps({"seed": 1, "extra_field": True}))
    with pytest.raises(SchemaError):
        StubDetectorSpec.load(bad)


def test_gradient_sensitivity_rewards_enhancement(tmp_path, enhancer_available):
    # enhancing low-contrast images raises gradient, so a gradient-
    # sensitive stub reports higher confidence on the enhanced set
    images, gt_path = make_dataset(tmp_path, n=10, seed=23)
    dict_path = tmp_path / "dict.json"
    dict_path.write_text(json.dumps({
        "detector_id": "fixture",
        "xi": {"contrast": 0.9, "color": 0.1, "clarity": 0.1, "brightness": 0.1},
        "ranges": {"gradient": [0.0, 0.9], "saturation": [0.0, 1.0],
                   "entropy": [0.0, 1.0], "brightness": [0.0, 1.0]},
        "time_cost": {"contrast": 0.027, "color": 0.033, "clarity": 0.021, "brightness": 0.024},
        "iou_threshold": 0.5,
    }))
    enhanced = tmp_path / "enhanced"
    proc = run_enhancer("enhance", "--in", str(images), "--out", str(enhanced), "--dict", str(dict_path))
    assert proc.returncode == 0, proc.stderr
    spec = StubDetectorSpec(seed=2, base_recall=1.0, base_confidence=0.4, sensitivity={"gradient": 300.0})

    def mean_conf(img_dir):
        doc = run_stub(img_dir, gt_path, spec)
        confs = [d["confidence"] for e in doc["images"] for d in e["detections"]]
        return sum(confs) / len(confs)

    assert mean_conf(enhanced) > mean_conf(images)
