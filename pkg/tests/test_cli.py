"""End-to-end CLI behavior: batch commands, determinism, error contracts."""

import csv
import json
import math

import numpy as np
import pytest

from utilenhance import (
    ApplicabilityRanges,
    ContributionDictionary,
    CorrectionKind,
    builtin_dictionary,
    clahe,
    extract_features,
    load_image,
    save_image,
)
from utilenhance.cli import main

from _fixtures import murky_image


@pytest.fixture
def image_dir(tmp_path):
    d = tmp_path / "imgs"
    d.mkdir()
    for i in range(3):
        save_image(murky_image(i, 48, 64), d / f"img{i}.png")
    return d


@pytest.fixture
def yolox_path(tmp_path):
    p = tmp_path / "yolox.json"
    builtin_dictionary("yolox").save(p)
    return p


def nothing_applies_dict(tmp_path):
    """Dictionary whose ranges exclude every murky fixture image."""
    d = ContributionDictionary(
        detector_id="never",
        xi=builtin_dictionary("yolox").xi,
        ranges=ApplicabilityRanges(
            gradient=(0.98, 0.99),
            saturation=(0.0, 0.001),
            entropy=(0.99, 1.0),
            brightness=(0.0, 0.001),
        ),
    )
    p = tmp_path / "never.json"
    d.save(p)
    return p


# --- features ----------------------------------------------------------------


def test_features_empty_dir(tmp_path, capsys):
    empty = tmp_path / "none"
    empty.mkdir()
    assert main(["features", "--in", str(empty)]) == 0
    out = capsys.readouterr().out
    assert out.strip() == "path,gradient,saturation,entropy,brightness"


def test_features_rows_match_module(image_dir, tmp_path):
    out_csv = tmp_path / "f.csv"
    assert main(["features", "--in", str(image_dir), "--out", str(out_csv)]) == 0
    rows = list(csv.DictReader(out_csv.open()))
    assert [r["path"] for r in rows] == ["img0.png", "img1.png", "img2.png"]
    for row in rows:
        fv = extract_features(load_image(image_dir / row["path"]))
        for name in ("gradient", "saturation", "entropy", "brightness"):
            assert float(row[name]) == pytest.approx(getattr(fv, name), abs=5e-7)


def test_features_gradient_mode_switch(image_dir, tmp_path):
    out_a = tmp_path / "a.csv"
    out_b = tmp_path / "b.csv"
    assert main(["features", "--in", str(image_dir), "--out", str(out_a)]) == 0
    assert main(["features", "--in", str(image_dir), "--gradient-mode", "sum_of_squares", "--out", str(out_b)]) == 0
    rows_a = list(csv.DictReader(out_a.open()))
    rows_b = list(csv.DictReader(out_b.open()))
    assert any(a["gradient"] != b["gradient"] for a, b in zip(rows_a, rows_b))
    for a, b in zip(rows_a, rows_b):  # the other columns are untouched
        assert (a["saturation"], a["entropy"], a["brightness"]) == (b["saturation"], b["entropy"], b["brightness"])


def test_features_bad_file_fails_but_emits_others(image_dir, tmp_path, capsys):
    (image_dir / "broken.png").write_bytes(b"\x89PNG\r\n\x1a\njunk")
    assert main(["features", "--in", str(image_dir)]) == 1
    out = capsys.readouterr().out
    assert "img0.png" in out and "img2.png" in out
    assert "broken" not in out


# --- select --------------------------------------------------------------------


def test_select_records(image_dir, yolox_path, tmp_path):
    out_json = tmp_path / "sel.json"
    assert main(["select", "--in", str(image_dir), "--dict", str(yolox_path), "--out", str(out_json)]) == 0
    records = json.loads(out_json.read_text())
    assert [r["image_id"] for r in records] == ["img0", "img1", "img2"]
    for r in records:
        assert set(r) == {"image_id", "features", "policy", "plan", "omega", "benefit"}
        assert r["policy"] == "strict_improving"


# --- enhance --------------------------------------------------------------------


def test_enhance_all_gated_off_copies_bytes(image_dir, tmp_path):
    never = nothing_applies_dict(tmp_path)
    out_dir = tmp_path / "out"
    assert main(["enhance", "--in", str(image_dir), "--out", str(out_dir), "--dict", str(never)]) == 0
    for i in range(3):
        assert (out_dir / f"img{i}.png").read_bytes() == (image_dir / f"img{i}.png").read_bytes()
    plans = json.loads((out_dir / "plans.json").read_text())
    assert all(p["plan"] == [] for p in plans)


def test_enhance_strict_yolox_is_clahe_only(image_dir, yolox_path, tmp_path):
    out_dir = tmp_path / "out"
    assert main(["enhance", "--in", str(image_dir), "--out", str(out_dir), "--dict", str(yolox_path)]) == 0
    plans = {p["image_id"]: p for p in json.loads((out_dir / "plans.json").read_text())}
    for i in range(3):
        img = load_image(image_dir / f"img{i}.png")
        assert plans[f"img{i}"]["plan"] == ["contrast"]
        produced = load_image(out_dir / f"img{i}.png")
        direct = clahe(img, clip=2.0, tiles=8)
        assert np.array_equal(produced.pixels, direct.pixels)


def _run_enhance(image_dir, dict_path, out_dir, workers):
    code = main(
        ["enhance", "--in", str(image_dir), "--out", str(out_dir), "--dict", str(dict_path), "--workers", str(workers)]
    )
    assert code == 0
    return {p.name: p.read_bytes() for p in sorted(out_dir.iterdir())}


def test_enhance_worker_count_never_changes_bytes(tmp_path, yolox_path):
    src = tmp_path / "many"
    src.mkdir()
    for i in range(8):
        save_image(murky_image(100 + i, 40, 56), src / f"m{i:02d}.png")
    a = _run_enhance(src, yolox_path, tmp_path / "w1", 1)
    b = _run_enhance(src, yolox_path, tmp_path / "w8", 8)
    assert a == b


def test_enhance_is_idempotent_given_same_inputs(image_dir, yolox_path, tmp_path):
    a = _run_enhance(image_dir, yolox_path, tmp_path / "r1", 2)
    b = _run_enhance(image_dir, yolox_path, tmp_path / "r2", 2)
    assert a == b


def test_enhance_mirrors_subdirectories(tmp_path, yolox_path):
    src = tmp_path / "tree"
    (src / "deep").mkdir(parents=True)
    save_image(murky_image(7, 32, 32), src / "deep" / "x.ppm")
    out_dir = tmp_path / "treeout"
    assert main(["enhance", "--in", str(src), "--out", str(out_dir), "--dict", str(yolox_path)]) == 0
    assert (out_dir / "deep" / "x.png").exists()
    plans = json.loads((out_dir / "plans.json").read_text())
    assert plans[0]["image_id"] == "deep/x"


# --- calibrate -------------------------------------------------------------------


def planted_dataset(tmp_path, n=200, rho=0.9, seed=77):
    """Images plus detections whose confidence tracks measured gradient."""
    rng = np.random.default_rng(seed)
    img_dir = tmp_path / "cal"
    img_dir.mkdir()
    grads = []
    for i in range(n):
        img = murky_image(
            seed * 1000 + i,
            48,
            48,
            contrast=float(rng.uniform(0.1, 3.0)),
            brightness=float(rng.uniform(-25, 25)),
            cast=float(rng.uniform(0.2, 1.4)),
            noise=float(rng.uniform(1.0, 9.0)),
        )
        save_image(img, img_dir / f"img{i:03d}.png")
        grads.append(extract_features(img).gradient)
    g = np.array(grads)
    gz = (g - g.mean()) / g.std()
    conf = np.clip(0.5 + 0.18 * (rho * gz + math.sqrt(1 - rho * rho) * rng.normal(size=n)), 0.01, 0.99)
    box = [4.0, 4.0, 20.0, 20.0]
    gt_doc = {"images": [{"id": f"img{i:03d}", "ground_truth": [{"bbox": box, "class": "fish"}]} for i in range(n)]}
    det_doc = {
        "images": [
            {
                "id": f"img{i:03d}",
                "detections": [{"bbox": box, "class": "fish", "confidence": float(conf[i])}],
            }
            for i in range(n)
        ]
    }
    gt_path = tmp_path / "gt.json"
    det_path = tmp_path / "dets.json"
    gt_path.write_text(json.dumps(gt_doc))
    det_path.write_text(json.dumps(det_doc))
    # q = 1 + conf here, so the planted correlation carries over exactly
    planted = abs(float(np.corrcoef(conf, g)[0, 1]))
    return img_dir, det_path, gt_path, planted


def test_calibrate_cli_recovers_planted_weight(tmp_path, capsys):
    img_dir, det_path, gt_path, planted = planted_dataset(tmp_path)
    out = tmp_path / "dict.json"
    code = main(
        [
            "calibrate",
            "--in", str(img_dir),
            "--dets", str(det_path),
            "--gt", str(gt_path),
            "--out", str(out),
            "--detector-id", "stub",
        ]
    )
    assert code == 0
    d = ContributionDictionary.load(out)
    assert d.detector_id == "stub"
    assert abs(d.xi[CorrectionKind.CONTRAST] - planted) < 1e-6  # q affine in confidence
    assert abs(d.xi[CorrectionKind.CONTRAST] - 0.9) < 0.1
    for kind in (CorrectionKind.COLOR, CorrectionKind.CLARITY, CorrectionKind.BRIGHTNESS):
        assert d.xi[kind] < d.xi[CorrectionKind.CONTRAST]
    table = capsys.readouterr().out
    assert "contrast" in table and "gradient" in table


def test_calibrate_cli_too_few_samples(tmp_path, capsys):
    img_dir, det_path, gt_path, _ = planted_dataset(tmp_path, n=2, seed=5)
    code = main(
        ["calibrate", "--in", str(img_dir), "--dets", str(det_path), "--gt", str(gt_path), "--out", str(tmp_path / "d.json")]
    )
    assert code == 1


def test_calibrate_round_trip(tmp_path):
    img_dir, det_path, gt_path, _ = planted_dataset(tmp_path, n=20, seed=6)
    out = tmp_path / "dict.json"
    assert main(["calibrate", "--in", str(img_dir), "--dets", str(det_path), "--gt", str(gt_path), "--out", str(out)]) == 0
    first = ContributionDictionary.load(out)
    first.save(tmp_path / "again.json")
    assert ContributionDictionary.load(tmp_path / "again.json") == first


# --- evaluate --------------------------------------------------------------------


def _eval_fixture(tmp_path, perfect=True):
    box = [0.0, 0.0, 10.0, 10.0]
    far = [50.0, 50.0, 60.0, 60.0]
    gt_doc = {
        "images": [
            {"id": "a", "ground_truth": [{"bbox": box, "class": "fish"}, {"bbox": far, "class": "fish"}]},
        ]
    }
    if perfect:
        dets = [
            {"bbox": box, "class": "fish", "confidence": 0.9},
            {"bbox": far, "class": "fish", "confidence": 0.8},
        ]
    else:
        dets = [
            {"bbox": box, "class": "fish", "confidence": 0.9},
            {"bbox": [80.0, 80.0, 90.0, 90.0], "class": "fish", "confidence": 0.7},
            {"bbox": far, "class": "fish", "confidence": 0.6},
        ]
    det_doc = {"images": [{"id": "a", "detections": dets}]}
    gt_path = tmp_path / "gt.json"
    det_path = tmp_path / ("perfect.json" if perfect else "staircase.json")
    gt_path.write_text(json.dumps(gt_doc))
    det_path.write_text(json.dumps(det_doc))
    return det_path, gt_path


def test_evaluate_perfect_detections(tmp_path, capsys):
    det_path, gt_path = _eval_fixture(tmp_path, perfect=True)
    assert main(["evaluate", "--dets", str(det_path), "--gt", str(gt_path)]) == 0
    out = capsys.readouterr().out
    assert "dataset mAP@0.5: 1.0000" in out


def test_evaluate_staircase_and_q_csv(tmp_path, capsys):
    det_path, gt_path = _eval_fixture(tmp_path, perfect=False)
    q_csv = tmp_path / "q.csv"
    assert main(["evaluate", "--dets", str(det_path), "--gt", str(gt_path), "--q-csv", str(q_csv)]) == 0
    out = capsys.readouterr().out
    assert "dataset mAP@0.5: 0.8333" in out
    rows = list(csv.DictReader(q_csv.open()))
    assert rows[0]["image_id"] == "a"
    assert float(rows[0]["q"]) == pytest.approx(0.833333 - 0 + 0.6 - 0.7, abs=1e-4)


def test_evaluate_baseline_delta(tmp_path, capsys):
    det_perfect, gt_path = _eval_fixture(tmp_path, perfect=True)
    det_stairs, _ = _eval_fixture(tmp_path, perfect=False)
    assert main(["evaluate", "--dets", str(det_perfect), "--gt", str(gt_path), "--baseline", str(det_stairs)]) == 0
    out = capsys.readouterr().out
    assert "baseline mAP: 0.8333" in out
    assert "delta mAP: +0.1667" in out


# --- bench -----------------------------------------------------------------------


def test_bench_reports_four_positive_times(capsys):
    assert main(["bench", "--size", "96x64", "--reps", "1"]) == 0
    out = capsys.readouterr().out
    for name in ("contrast", "color", "clarity", "brightness"):
        line = next(l for l in out.splitlines() if name in l)
        assert float(line.split()[1]) > 0
    assert "images/sec" in out


def test_bench_writes_valid_measured_dictionary(tmp_path, yolox_path, capsys):
    out = tmp_path / "measured.json"
    assert main(["bench", "--size", "64x48", "--reps", "1", "--dict", str(yolox_path), "--out", str(out)]) == 0
    d = ContributionDictionary.load(out)
    assert d.xi == builtin_dictionary("yolox").xi
    assert all(t > 0 for t in d.time_cost.values())


# --- config ----------------------------------------------------------------------


def test_config_file_with_flag_override(image_dir, yolox_path, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "dictionary": str(yolox_path),
                "policy": "threshold",
                "tau": 0.5,
                "input_dir": str(image_dir),
                "params": {"clahe_tiles": 4},
            }
        )
    )
    out_json = tmp_path / "sel.json"
    assert main(["select", "--config", str(cfg), "--out", str(out_json)]) == 0
    records = json.loads(out_json.read_text())
    assert records[0]["policy"].startswith("threshold")
    # flag overrides the config's policy
    assert main(["select", "--config", str(cfg), "--policy", "strict", "--out", str(out_json)]) == 0
    records = json.loads(out_json.read_text())
    assert records[0]["policy"] == "strict_improving"


def test_unknown_config_field_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"nope": 1}))
    with pytest.raises(SystemExit):
        main(["features", "--config", str(cfg), "--in", "."])


def test_missing_input_dir_rejected(tmp_path):
    with pytest.raises(SystemExit):
        main(["features", "--in", str(tmp_path / "absent")])


def test_missing_dictionary_rejected(image_dir, tmp_path):
    with pytest.raises(SystemExit):
        main(["select", "--in", str(image_dir), "--dict", str(tmp_path / "none.json")])


def test_missing_detections_file_is_clean_error(tmp_path, capsys):
    gt = tmp_path / "gt.json"
    gt.write_text('{"images": []}')
    assert main(["evaluate", "--dets", str(tmp_path / "absent.json"), "--gt", str(gt)]) == 1
    assert "error:" in capsys.readouterr().err


def test_log_level_from_environment(tmp_path, monkeypatch):
    import logging

    empty = tmp_path / "e"
    empty.mkdir()
    monkeypatch.setenv("UTILENHANCE_LOG", "DEBUG")
    assert main(["features", "--in", str(empty), "--out", str(tmp_path / "f.csv")]) == 0
    assert logging.getLogger().level == logging.DEBUG
