"""Detection evaluation anatomy: matching, the AP staircase, and the
per-image utility score.

Builds a tiny hand-checkable scenario (two ground truths, three ranked
detections) and walks from greedy matching through the interpolated
precision-recall staircase to q = mAP - FN/GT + C_TP - C_FP.
"""

from utilenhance import Box, Detection, GroundTruth, match_detections, utility_score
from utilenhance.utility import pr_points


def box(i):
    return Box(i * 20.0, 0.0, i * 20.0 + 10.0, 10.0)


def main():
    gts = [GroundTruth(box(0), "fish"), GroundTruth(box(1), "fish")]
    dets = [
        Detection(box(0), "fish", confidence=0.9),   # true positive
        Detection(box(7), "fish", confidence=0.7),   # false positive (empty cell)
        Detection(box(1), "fish", confidence=0.6),   # true positive
    ]
    report = match_detections(dets, gts, iou_threshold=0.5)
    print("ranked matching outcome (confidence desc):")
    for conf, is_tp in report.per_class["fish"].ranked:
        print(f"  conf {conf:.1f} -> {'TP' if is_tp else 'FP'}")

    recalls, precisions = pr_points(report.per_class["fish"])
    print("\nprecision-recall staircase:")
    for r, p in zip(recalls, precisions):
        print(f"  recall {r:.2f}  precision {p:.3f}")

    score = utility_score(dets, gts, iou_threshold=0.5)
    print(f"\ninterpolated AP: {score.map:.4f}   (0.5*1.0 + 0.5*2/3 = 0.8333)")
    print(f"miss rate FN/GT: {score.miss_rate:.2f}")
    print(f"C_TP (weakest true positive): {score.c_tp:.2f}")
    print(f"C_FP (strongest false positive): {score.c_fp:.2f}")
    print(f"q = {score.map:.4f} - {score.miss_rate:.2f} + {score.c_tp:.2f} - {score.c_fp:.2f} = {score.q:.4f}")

    print("\nthe same detections without the stray 0.7 false positive:")
    better = utility_score([dets[0], dets[2]], gts, iou_threshold=0.5)
    print(f"q rises to {better.q:.4f}: fewer false alarms, same recall.")


if __name__ == "__main__":
    main()
