"""Miniature calibrate-enhance-evaluate loop, entirely in memory.

A simulated detector's recall and confidence respond to the gradient
feature. Calibration against its output discovers that preference as the
dominant contrast weight; enhancement guided by the calibrated dictionary
then raises the mean per-image utility score.
"""

import random

import numpy as np

from utilenhance import (
    Box,
    CalibrationSample,
    Detection,
    GroundTruth,
    apply_cascade,
    calibrate,
    extract_features,
    select_cascade,
    utility_score,
)

from _scenes import murky_scene

GT = [GroundTruth(Box(10.0, 10.0, 40.0, 40.0), "urchin"),
      GroundTruth(Box(60.0, 14.0, 95.0, 44.0), "urchin"),
      GroundTruth(Box(104.0, 50.0, 136.0, 86.0), "urchin")]


def simulated_detector(features, rng):
    """Recall and confidence rise with the gradient feature."""
    lift = 350.0 * features.gradient
    p_hit = min(max(0.5 + lift, 0.0), 1.0)
    conf = min(max(0.35 + lift, 0.0), 1.0)
    dets = []
    for g in GT:
        if rng.random() < p_hit:
            dets.append(Detection(g.box, g.class_id, conf))
        if rng.random() < 0.1:
            shifted = Box(g.box.x_min + 34.0, g.box.y_min + 34.0, g.box.x_max + 34.0, g.box.y_max + 34.0)
            dets.append(Detection(shifted, g.class_id, min(0.6 * conf, 1.0)))
    return dets


def score_set(images, rng_seed):
    rng = random.Random(rng_seed)
    samples, qs = [], []
    for i, img in enumerate(images):
        fv = extract_features(img)
        score = utility_score(simulated_detector(fv, rng), GT, iou_threshold=0.5)
        samples.append(CalibrationSample(image_id=f"img{i}", features=fv, utility=score))
        qs.append(score.q)
    return samples, float(np.mean(qs))


def main():
    gen = np.random.default_rng(99)
    images = [murky_scene(int(gen.integers(1e6)), contrast=float(gen.uniform(0.2, 3.0))) for _ in range(40)]

    samples, q_raw = score_set(images, rng_seed=1)
    dictionary = calibrate(samples, detector_id="simulated")
    print("calibrated contribution weights (|PLCC| of q vs each feature):")
    for kind, weight in dictionary.xi.items():
        print(f"  {str(kind):<12} {weight:.4f}")

    enhanced = []
    fired = 0
    for img in images:
        plan = select_cascade(extract_features(img), dictionary, policy="strict_improving")
        fired += bool(plan.kinds)
        enhanced.append(apply_cascade(img, plan))
    print(f"\ncascades fired on {fired}/40 images (strict policy)")

    _, q_enh = score_set(enhanced, rng_seed=1)
    print(f"mean per-image q: raw {q_raw:.4f} -> enhanced {q_enh:.4f}")
    print("the detector's planted gradient preference was recovered and exploited.")


if __name__ == "__main__":
    main()
