"""The four normalized image features that gate and calibrate corrections.

gradient: Tenengrad-style Sobel response, saturation: mean (max-min)/max,
entropy: luma histogram entropy / 8, brightness: mean luma / 255. Each is
a scalar in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ImageTooSmall
from .imgio import RasterImage, luma_f, to_luma

# Applicability intervals: a correction only applies while its paired
# feature sits inside the closed interval.
DEFAULT_RANGES_TABLE = {
    "gradient": (0.0, 0.9),
    "saturation": (0.3, 0.5),
    "entropy": (0.0, 0.9),
    "brightness": (0.4, 0.6),
}

FEATURE_NAMES = ("gradient", "saturation", "entropy", "brightness")

# Max of (|gx|+|gy|)^2 for a Sobel pair on [0,1] input; of gx^2+gy^2 below.
_SUM_ABS_SQ_MAX = 64.0
_SUM_OF_SQ_MAX = 32.0


@dataclass(frozen=True)
class FeatureVector:
    gradient: float
    saturation: float
    entropy: float
    brightness: float

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in FEATURE_NAMES}


@dataclass(frozen=True)
class ApplicabilityRanges:
    """Closed [lo, hi] interval per feature, in normalized units."""

    gradient: tuple[float, float] = DEFAULT_RANGES_TABLE["gradient"]
    saturation: tuple[float, float] = DEFAULT_RANGES_TABLE["saturation"]
    entropy: tuple[float, float] = DEFAULT_RANGES_TABLE["entropy"]
    brightness: tuple[float, float] = DEFAULT_RANGES_TABLE["brightness"]

    def __post_init__(self):
        for name in FEATURE_NAMES:
            lo, hi = getattr(self, name)
            if not (0.0 <= lo <= hi <= 1.0):
                raise ValueError(f"{name} range [{lo}, {hi}] must satisfy 0 <= lo <= hi <= 1")

    def contains(self, name: str, value: float) -> bool:
        lo, hi = getattr(self, name)
        return lo <= value <= hi

    def as_dict(self) -> dict[str, list[float]]:
        return {name: list(getattr(self, name)) for name in FEATURE_NAMES}


DEFAULT_RANGES = ApplicabilityRanges()


def brightness(img: RasterImage) -> float:
    """Mean of (0.299R + 0.587G + 0.114B) / 255 over all pixels."""
    return float(np.mean(luma_f(img)) / 255.0)


def saturation(img: RasterImage) -> float:
    """Mean per-pixel (max - min) / max over channels; black pixels
    (max = 0) contribute 0."""
    px = img.pixels
    mx = px.max(axis=2).astype(np.float64)
    mn = px.min(axis=2).astype(np.float64)
    sat = np.divide(mx - mn, mx, out=np.zeros_like(mx), where=mx > 0)
    return float(sat.mean())


def entropy(img: RasterImage) -> float:
    """Shannon entropy of the 256-bin luma histogram, normalized by 8."""
    hist = np.bincount(to_luma(img).pixels.ravel(), minlength=256)
    p = hist[hist > 0] / hist.sum()
    return float(-(p * np.log2(p)).sum() / 8.0)


def gradient(img: RasterImage, mode: str = "sum_abs_squared") -> float:
    """Normalized Sobel sharpness over interior pixels of the luma plane.

    mode 'sum_abs_squared' (default) scores (|gx| + |gy|)^2 / 64;
    mode 'sum_of_squares' scores (gx^2 + gy^2) / 32. Either way the luma
    is first normalized to [0, 1] and the mean is clamped into [0, 1].
    Needs at least a 3x3 image.
    """
    if img.height < 3 or img.width < 3:
        raise ImageTooSmall(f"gradient needs >= 3x3, got {img.height}x{img.width}")
    a = to_luma(img).pixels.astype(np.float64) / 255.0
    # 3x3 Sobel via shifted slices; responses exist on the interior only.
    gx = (
        (a[:-2, 2:] + 2.0 * a[1:-1, 2:] + a[2:, 2:])
        - (a[:-2, :-2] + 2.0 * a[1:-1, :-2] + a[2:, :-2])
    )
    gy = (
        (a[2:, :-2] + 2.0 * a[2:, 1:-1] + a[2:, 2:])
        - (a[:-2, :-2] + 2.0 * a[:-2, 1:-1] + a[:-2, 2:])
    )
    if mode == "sum_abs_squared":
        score = (np.abs(gx) + np.abs(gy)) ** 2 / _SUM_ABS_SQ_MAX
    elif mode == "sum_of_squares":
        score = (gx * gx + gy * gy) / _SUM_OF_SQ_MAX
    else:
        raise ValueError(f"unknown gradient mode {mode!r}")
    return float(np.clip(score.mean(), 0.0, 1.0))


def extract_features(img: RasterImage, gradient_mode: str = "sum_abs_squared") -> FeatureVector:
    """All four features for one image."""
    return FeatureVector(
        gradient=gradient(img, mode=gradient_mode),
        saturation=saturation(img),
        entropy=entropy(img),
        brightness=brightness(img),
    )
