"""Utility-oriented image enhancement for detection pipelines.

Selects and applies per-image cascades of low-level corrections
(contrast, color, clarity, brightness) chosen to maximize downstream
object-detection utility, guided by a calibratable contribution
dictionary and a benefit-per-time rule.
"""

from .calibration import (
    DEFAULT_TIME_COST,
    CalibrationSample,
    ContributionDictionary,
    builtin_dictionary,
    calibrate,
    measure_time_cost,
    plcc,
)
from .corrections import (
    PAIRED_FEATURE,
    RANK_ORDER,
    CorrectionKind,
    CorrectionParams,
    apply_cascade,
    apply_correction,
    clahe,
    gamma_transform,
    median_filter,
    white_balance,
)
from .features import (
    DEFAULT_RANGES,
    ApplicabilityRanges,
    FeatureVector,
    brightness,
    entropy,
    extract_features,
    gradient,
    saturation,
)
from .imgio import GrayImage, RasterImage, decode, encode, load_image, quantize_u8, save_image, to_luma
from .selection import CascadePlan, CorrectionScore, omega, plan_from_kinds, score_corrections, select_cascade
from .utility import (
    Box,
    DatasetReport,
    Detection,
    GroundTruth,
    MatchReport,
    UtilityScore,
    average_precision,
    evaluate_dataset,
    iou,
    match_detections,
    mean_average_precision,
    read_detections_file,
    read_ground_truth_file,
    utility_score,
)

__version__ = "0.1.0"
