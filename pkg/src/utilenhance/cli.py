"""Command-line pipeline: features, select, enhance, calibrate, evaluate,
bench.

Every command reads an optional JSON config (--config) whose fields are
individually overridable by flags; flags win. Outputs are deterministic:
fixed row/record ordering (lexicographic by image path) and a worker
count that never changes any output byte. Set UTILENHANCE_LOG to adjust
log verbosity.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from statistics import median

import numpy as np

from .calibration import (
    CalibrationSample,
    ContributionDictionary,
    calibrate,
    measure_time_cost,
)
from .corrections import PAIRED_FEATURE, RANK_ORDER, CorrectionParams, apply_cascade
from .errors import UtilEnhanceError
from .features import FEATURE_NAMES, ApplicabilityRanges, extract_features
from .imgio import RasterImage, encode, load_image
from .selection import plan_from_kinds, select_cascade
from .utility import evaluate_dataset, read_detections_file, read_ground_truth_file, utility_score

log = logging.getLogger("utilenhance")

IMAGE_SUFFIXES = {".png", ".ppm"}

_POLICY_ALIASES = {"strict": "strict_improving", "strict_improving": "strict_improving", "threshold": "threshold"}


@dataclass
class PipelineConfig:
    dictionary: str | None = None
    policy: str = "strict_improving"
    tau: float = 0.5
    iou_threshold: float = 0.5
    input_dir: str | None = None
    output_dir: str | None = None
    workers: int = 1
    gradient_mode: str = "sum_abs_squared"
    params: CorrectionParams = field(default_factory=CorrectionParams)


def _config_from(args: argparse.Namespace) -> PipelineConfig:
    cfg = PipelineConfig()
    if getattr(args, "config", None):
        doc = json.loads(Path(args.config).read_text())
        params = doc.pop("params", None)
        if params is not None:
            cfg = replace(cfg, params=CorrectionParams(**params))
        for key, value in doc.items():
            if not hasattr(cfg, key):
                raise SystemExit(f"config: unknown field {key!r}")
            cfg = replace(cfg, **{key: value})
    overrides = {
        "dictionary": getattr(args, "dict", None),
        "policy": getattr(args, "policy", None),
        "tau": getattr(args, "tau", None),
        "iou_threshold": getattr(args, "iou", None),
        "input_dir": getattr(args, "in_dir", None),
        "output_dir": getattr(args, "out", None),
        "workers": getattr(args, "workers", None),
        "gradient_mode": getattr(args, "gradient_mode", None),
    }
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    cfg.policy = _POLICY_ALIASES.get(cfg.policy, cfg.policy)
    if cfg.workers < 1:
        raise SystemExit(f"workers must be >= 1, got {cfg.workers}")
    return cfg


def _discover_images(input_dir: str | None) -> list[tuple[str, Path]]:
    """Sorted (relative posix path, absolute path) pairs for every image
    file under the input directory."""
    if not input_dir:
        raise SystemExit("an input directory is required (--in)")
    root = Path(input_dir)
    if not root.is_dir():
        raise SystemExit(f"input directory {input_dir!r} does not exist")
    found = [
        (p.relative_to(root).as_posix(), p)
        for p in root.rglob("*")
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    ]
    return sorted(found, key=lambda pair: pair[0])


def _image_id(relpath: str) -> str:
    # Image ids drop the extension so enhanced copies (always .png) keep
    # the same identity as their sources.
    return relpath.rsplit(".", 1)[0]


def _load_dictionary(cfg: PipelineConfig) -> ContributionDictionary:
    if not cfg.dictionary:
        raise SystemExit("a contribution dictionary is required (--dict)")
    if not Path(cfg.dictionary).is_file():
        raise SystemExit(f"dictionary file {cfg.dictionary!r} does not exist")
    return ContributionDictionary.load(cfg.dictionary)


def _write_text(path: str | None, text: str) -> None:
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


# --- subcommands ------------------------------------------------------------


def cmd_features(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    images = _discover_images(cfg.input_dir)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["path", *FEATURE_NAMES])
    failures = 0
    for relpath, path in images:
        try:
            fv = extract_features(load_image(path), gradient_mode=cfg.gradient_mode)
        except (UtilEnhanceError, OSError) as exc:
            log.error("features: %s: %s", relpath, exc)
            failures += 1
            continue
        writer.writerow([relpath] + [f"{getattr(fv, n):.6f}" for n in FEATURE_NAMES])
    _write_text(args.out, buf.getvalue())
    if failures:
        log.error("features: %d file(s) failed", failures)
    return 1 if failures else 0


def _select_record(relpath: str, img: RasterImage, cfg: PipelineConfig, dictionary: ContributionDictionary) -> dict:
    fv = extract_features(img, gradient_mode=cfg.gradient_mode)
    plan = select_cascade(fv, dictionary, policy=cfg.policy, tau=cfg.tau, params=cfg.params)
    record = {"image_id": _image_id(relpath), "features": {n: getattr(fv, n) for n in FEATURE_NAMES}}
    record.update(plan.describe())
    return record


def cmd_select(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    dictionary = _load_dictionary(cfg)
    failures = 0
    records = []
    for relpath, path in _discover_images(cfg.input_dir):
        try:
            records.append(_select_record(relpath, load_image(path), cfg, dictionary))
        except (UtilEnhanceError, OSError) as exc:
            log.error("select: %s: %s", relpath, exc)
            failures += 1
    _write_text(args.out, json.dumps(records, indent=2) + "\n")
    return 1 if failures else 0


def _enhance_one(task: tuple[str, Path, PipelineConfig, ContributionDictionary]) -> tuple[str, bytes, dict]:
    relpath, path, cfg, dictionary = task
    img = load_image(path)
    fv = extract_features(img, gradient_mode=cfg.gradient_mode)
    plan = select_cascade(fv, dictionary, policy=cfg.policy, tau=cfg.tau, params=cfg.params)
    out = apply_cascade(img, plan)
    record = {"image_id": _image_id(relpath), "features": {n: getattr(fv, n) for n in FEATURE_NAMES}}
    record.update(plan.describe())
    return relpath, encode(out, "png"), record


def cmd_enhance(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    dictionary = _load_dictionary(cfg)
    if not cfg.output_dir:
        raise SystemExit("an output directory is required (--out)")
    out_root = Path(cfg.output_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    images = _discover_images(cfg.input_dir)
    tasks = [(relpath, path, cfg, dictionary) for relpath, path in images]
    failures = 0
    records = []
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        for task, result in zip(tasks, pool.map(_guarded_enhance, tasks)):
            relpath = task[0]
            if isinstance(result, Exception):
                log.error("enhance: %s: %s", relpath, result)
                failures += 1
                continue
            _, png_bytes, record = result
            dest = out_root / Path(relpath).with_suffix(".png")
            dest.parent.mkdir(parents=True, exist_ok=True)
            dest.write_bytes(png_bytes)
            records.append(record)
    records.sort(key=lambda r: r["image_id"])
    (out_root / "plans.json").write_text(json.dumps(records, indent=2) + "\n")
    log.info("enhance: %d image(s), %d failure(s)", len(images), failures)
    return 1 if failures else 0


def _guarded_enhance(task) -> tuple[str, bytes, dict] | Exception:
    try:
        return _enhance_one(task)
    except (UtilEnhanceError, OSError) as exc:
        return exc


def cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    if not args.out:
        raise SystemExit("a dictionary output path is required (--out)")
    dets_by_image = read_detections_file(args.dets)
    gts_by_image = read_ground_truth_file(args.gt)
    by_id = {_image_id(relpath): path for relpath, path in _discover_images(cfg.input_dir)}
    samples = []
    failures = 0
    for img_id in sorted(gts_by_image):
        gts = gts_by_image[img_id]
        if not gts:
            continue  # q undefined without ground truth
        if img_id not in by_id:
            log.error("calibrate: image id %r not found under %s", img_id, cfg.input_dir)
            failures += 1
            continue
        try:
            fv = extract_features(load_image(by_id[img_id]), gradient_mode=cfg.gradient_mode)
        except (UtilEnhanceError, OSError) as exc:
            log.error("calibrate: %s: %s", img_id, exc)
            failures += 1
            continue
        score = utility_score(dets_by_image.get(img_id, []), gts, cfg.iou_threshold)
        samples.append(CalibrationSample(image_id=img_id, features=fv, utility=score))
    ranges = ApplicabilityRanges()
    dictionary = calibrate(
        samples,
        ranges=ranges,
        detector_id=args.detector_id,
        iou_threshold=cfg.iou_threshold,
        normalize_sum_to_one=args.normalize,
    )
    print(f"calibrated {dictionary.detector_id!r} from {len(samples)} image(s)")
    print(f"{'correction':<12} {'feature':<12} {'xi':>8}")
    for kind in RANK_ORDER:
        print(f"{str(kind):<12} {PAIRED_FEATURE[kind]:<12} {dictionary.xi[kind]:>8.4f}")
    dictionary.save(args.out)
    print(f"wrote {args.out}")
    return 1 if failures else 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    dets = read_detections_file(args.dets)
    gts = read_ground_truth_file(args.gt)
    report = evaluate_dataset(dets, gts, cfg.iou_threshold)
    print(f"dataset mAP@{cfg.iou_threshold:g}: {report.map:.4f}")
    if args.baseline:
        base = evaluate_dataset(read_detections_file(args.baseline), gts, cfg.iou_threshold)
        print(f"baseline mAP: {base.map:.4f}   delta mAP: {report.map - base.map:+.4f}")
    for cls, ap in report.per_class_ap.items():
        print(f"  AP[{cls}]: {ap:.4f}")
    qs = [score.q for _, score in report.per_image]
    if qs:
        print(f"per-image q: mean {np.mean(qs):.4f}  median {np.median(qs):.4f}  n {len(qs)}")
    if report.skipped_no_gt:
        print(f"skipped {len(report.skipped_no_gt)} image(s) without ground truth")
    if args.q_csv:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["image_id", "q", "map", "miss_rate", "c_tp", "c_fp"])
        for img_id, s in report.per_image:
            writer.writerow([img_id, f"{s.q:.6f}", f"{s.map:.6f}", f"{s.miss_rate:.6f}", f"{s.c_tp:.6f}", f"{s.c_fp:.6f}"])
        _write_text(args.q_csv, buf.getvalue())
    return 0


def _bench_images(cfg: PipelineConfig, size: str) -> list[RasterImage]:
    if cfg.input_dir:
        images = [load_image(p) for _, p in _discover_images(cfg.input_dir)]
        if not images:
            raise SystemExit(f"no images found under {cfg.input_dir!r}")
        return images
    w, h = (int(v) for v in size.lower().split("x"))
    rng = np.random.default_rng(20240513)
    return [RasterImage(rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8))]


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _config_from(args)
    images = _bench_images(cfg, args.size)
    h, w = images[0].height, images[0].width
    print(f"benchmarking on {len(images)} image(s) at {w}x{h}, {args.reps} rep(s)")
    costs = measure_time_cost(images, cfg.params, reps=args.reps)
    for kind in RANK_ORDER:
        print(f"  {str(kind):<12} {costs[kind] * 1e3:8.3f} ms/image")
    full_plan = plan_from_kinds(list(RANK_ORDER), params=cfg.params, policy_id="bench")
    apply_cascade(images[0], full_plan)  # warm-up
    times = []
    for _ in range(args.reps):
        for img in images:
            t0 = time.perf_counter()
            apply_cascade(img, full_plan)
            times.append(time.perf_counter() - t0)
    per_image = median(times)
    print(f"full cascade: {per_image * 1e3:.3f} ms/image ({1.0 / per_image:.1f} images/sec)")
    if args.out:
        if not cfg.dictionary:
            raise SystemExit("writing a measured-cost dictionary needs --dict for the xi weights")
        base = ContributionDictionary.load(cfg.dictionary)
        updated = ContributionDictionary(
            detector_id=base.detector_id,
            xi=base.xi,
            ranges=base.ranges,
            time_cost=costs,
            iou_threshold=base.iou_threshold,
        )
        updated.save(args.out)
        print(f"wrote {args.out}")
    return 0


# --- argument parsing -------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="utilenhance",
        description="Detection-utility oriented image enhancement pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, out_help: str) -> None:
        p.add_argument("--config", help="JSON config file; flags override its fields")
        p.add_argument("--dict", help="contribution dictionary JSON")
        p.add_argument("--policy", choices=sorted(_POLICY_ALIASES), help="cascade selection policy")
        p.add_argument("--tau", type=float, help="threshold policy fraction in (0, 1]")
        p.add_argument("--iou", type=float, help="IoU threshold for matching")
        p.add_argument("--in", dest="in_dir", help="input image directory")
        p.add_argument("--out", help=out_help)
        p.add_argument("--workers", type=int, help="worker count (never affects output bytes)")
        p.add_argument("--gradient-mode", choices=["sum_abs_squared", "sum_of_squares"], help="gradient feature variant")

    p = sub.add_parser("features", help="per-image feature CSV")
    common(p, "CSV output path (default stdout)")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("select", help="per-image cascade plans as JSON")
    common(p, "JSON output path (default stdout)")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("enhance", help="apply selected cascades, writing PNGs plus plans.json")
    common(p, "output directory")
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("calibrate", help="build a contribution dictionary from detections + ground truth")
    common(p, "dictionary JSON output path")
    p.add_argument("--dets", required=True, help="detections JSON file")
    p.add_argument("--gt", required=True, help="ground-truth JSON file")
    p.add_argument("--detector-id", default="calibrated", help="name recorded in the dictionary")
    p.add_argument("--normalize", action="store_true", help="renormalize weights to sum to one")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("evaluate", help="dataset mAP and per-image utility report")
    common(p, "unused")
    p.add_argument("--dets", required=True, help="detections JSON file")
    p.add_argument("--gt", required=True, help="ground-truth JSON file")
    p.add_argument("--baseline", help="second detections file to diff against")
    p.add_argument("--q-csv", help="write per-image q scores to this CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="time corrections and the full cascade")
    common(p, "write a --dict copy carrying the measured time costs")
    p.add_argument("--size", default="640x480", help="synthetic image size when --in is absent")
    p.add_argument("--reps", type=int, default=5, help="timing repetitions")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=os.environ.get("UTILENHANCE_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UtilEnhanceError, OSError) as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
