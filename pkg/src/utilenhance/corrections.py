"""The four low-level correction operators and cascade application.

Contrast -> CLAHE, Color -> gray-world white balance, Clarity -> median
filter, Brightness -> gamma transform. All operators are pure functions of
their inputs and preserve image dimensions.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import TYPE_CHECKING

import cv2
import numpy as np

from ._kernels import clahe_apply, tile_hists
from .errors import DuplicateCorrection, InvalidParam
from .imgio import RasterImage, quantize_u8, to_luma

if TYPE_CHECKING:
    from .selection import CascadePlan


class CorrectionKind(enum.Enum):
    CONTRAST = "contrast"
    COLOR = "color"
    CLARITY = "clarity"
    BRIGHTNESS = "brightness"

    def __str__(self) -> str:
        return self.value


# Canonical contribution-rank order; cascade plans are subsequences of it.
RANK_ORDER = (
    CorrectionKind.CONTRAST,
    CorrectionKind.COLOR,
    CorrectionKind.CLARITY,
    CorrectionKind.BRIGHTNESS,
)

# Which measured feature gates each correction.
PAIRED_FEATURE = {
    CorrectionKind.CONTRAST: "gradient",
    CorrectionKind.COLOR: "saturation",
    CorrectionKind.CLARITY: "entropy",
    CorrectionKind.BRIGHTNESS: "brightness",
}


@dataclass(frozen=True)
class CorrectionParams:
    """Operator parameters; defaults follow common practice where the
    method itself does not pin them (gamma 0.5 is the standard low-light
    stretch)."""

    gamma: float = 0.5
    median_window: int = 3
    clahe_clip: float = 2.0
    clahe_tiles: int = 8
    wb_max_gain: float = 3.0

    def __post_init__(self):
        if not (self.gamma > 0):
            raise InvalidParam(f"gamma must be > 0, got {self.gamma}")
        if self.median_window < 3 or self.median_window % 2 == 0:
            raise InvalidParam(f"median_window must be odd and >= 3, got {self.median_window}")
        if not (self.clahe_clip >= 1):
            raise InvalidParam(f"clahe_clip must be >= 1, got {self.clahe_clip}")
        if self.clahe_tiles < 1:
            raise InvalidParam(f"clahe_tiles must be >= 1, got {self.clahe_tiles}")
        if not (self.wb_max_gain >= 1):
            raise InvalidParam(f"wb_max_gain must be >= 1, got {self.wb_max_gain}")


def gamma_transform(img: RasterImage, gamma: float = 0.5) -> RasterImage:
    """Per-channel power-law mapping out = round(255 * (in/255)^gamma)."""
    if not (gamma > 0) or not np.isfinite(gamma):
        raise InvalidParam(f"gamma must be a positive finite number, got {gamma}")
    lut = quantize_u8(255.0 * (np.arange(256, dtype=np.float64) / 255.0) ** gamma)
    return RasterImage(cv2.LUT(img.pixels, lut))


def white_balance(img: RasterImage, wb_max_gain: float = 3.0) -> RasterImage:
    """Gray-world white balance with capped channel gains.

    Each channel is scaled by min(mean_gray / channel_mean, wb_max_gain),
    where mean_gray is the mean of the three channel means. A channel with
    zero mean gets the capped gain.
    """
    if not (wb_max_gain >= 1):
        raise InvalidParam(f"wb_max_gain must be >= 1, got {wb_max_gain}")
    n = img.width * img.height
    channels = cv2.split(img.pixels)
    means = [float(ch.sum(dtype=np.int64)) / n for ch in channels]
    gray = (means[0] + means[1] + means[2]) / 3.0
    levels = np.arange(256, dtype=np.float64)
    luts = []
    for c in range(3):
        gain = wb_max_gain if means[c] == 0 else min(gray / means[c], wb_max_gain)
        luts.append(quantize_u8(levels * gain))
    return RasterImage(cv2.LUT(img.pixels, np.stack(luts, axis=-1).reshape(1, 256, 3)))


def median_filter(img: RasterImage, window: int = 3) -> RasterImage:
    """Per-channel exact median over a window x window neighborhood,
    borders by edge replication (cv2.medianBlur semantics)."""
    if window < 3 or window % 2 == 0:
        raise InvalidParam(f"median window must be odd and >= 3, got {window}")
    return RasterImage(cv2.medianBlur(img.pixels, window))


def _tile_slices(extent: int, tiles: int) -> list[slice]:
    # Near-equal partition; never more tiles than pixels along the axis.
    tiles = min(tiles, extent)
    bounds = np.linspace(0, extent, tiles + 1).astype(np.int64)
    return [slice(int(bounds[i]), int(bounds[i + 1])) for i in range(tiles)]


def _tile_mapping(hist: np.ndarray, clip: float) -> np.ndarray:
    """256-entry float mapping for one tile histogram.

    Bins are clipped at clip * pixels/256 with the excess spread uniformly
    in a single pass, then levels map through the normalized CDF anchored
    at level 0: 255 * (cdf(v) - cdf(0)) / (1 - cdf(0)). A tile whose
    histogram occupies a single bin maps identically (keeps flat regions
    at their level).
    """
    n = hist.sum()
    if np.count_nonzero(hist) <= 1:
        return np.arange(256, dtype=np.float64)
    limit = clip * n / 256.0
    excess = np.maximum(hist - limit, 0.0).sum()
    clipped = np.minimum(hist, limit) + excess / 256.0
    cdf = np.cumsum(clipped) / n
    c0 = cdf[0]
    return 255.0 * (cdf - c0) / (1.0 - c0)


def _tile_mappings(hists: np.ndarray, clip: float) -> np.ndarray:
    """All tile mappings at once; same arithmetic as _tile_mapping."""
    n = hists.sum(axis=-1, keepdims=True)
    limit = clip * n / 256.0
    excess = np.maximum(hists - limit, 0.0).sum(axis=-1, keepdims=True)
    clipped = np.minimum(hists, limit) + excess / 256.0
    cdf = np.cumsum(clipped, axis=-1) / n
    c0 = cdf[..., :1]
    with np.errstate(invalid="ignore", divide="ignore"):
        maps = 255.0 * (cdf - c0) / (1.0 - c0)
    single_bin = (hists > 0).sum(axis=-1) <= 1
    maps[single_bin] = np.arange(256, dtype=np.float64)
    return maps


def _axis_blend(extent: int, slices: list[slice]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # For each coordinate: the two bracketing tile indices and the blend
    # weight toward the second. Coordinates beyond the first/last tile
    # center clamp to the edge mapping.
    centers = np.array([(s.start + s.stop - 1) / 2.0 for s in slices])
    coords = np.arange(extent, dtype=np.float64)
    hi = np.clip(np.searchsorted(centers, coords, side="left"), 0, len(slices) - 1)
    lo = np.clip(hi - 1, 0, len(slices) - 1)
    span = centers[hi] - centers[lo]
    with np.errstate(invalid="ignore", divide="ignore"):
        w = np.where(span > 0, (coords - centers[lo]) / np.where(span > 0, span, 1.0), 0.0)
    return lo, hi, np.clip(w, 0.0, 1.0)


def clahe(img: RasterImage, clip: float = 2.0, tiles: int = 8) -> RasterImage:
    """Contrast-limited adaptive histogram equalization on the luma plane.

    The image is split into an even tiles x tiles grid, each tile gets a
    clipped-histogram CDF mapping, and every pixel's new luma bilinearly
    interpolates the four surrounding tile mappings. RGB is rescaled by
    new_luma/old_luma per pixel (a zero old luma writes the new luma on
    all three channels), so hue is preserved.
    """
    if tiles < 1:
        raise InvalidParam(f"tiles must be >= 1, got {tiles}")
    if not (clip >= 1):
        raise InvalidParam(f"clip must be >= 1, got {clip}")
    luma = to_luma(img).pixels
    h, w = luma.shape
    row_slices = _tile_slices(h, tiles)
    col_slices = _tile_slices(w, tiles)
    row_tile = np.repeat(np.arange(len(row_slices), dtype=np.int64), [s.stop - s.start for s in row_slices])
    col_tile = np.repeat(np.arange(len(col_slices), dtype=np.int64), [s.stop - s.start for s in col_slices])
    hists = tile_hists(luma, row_tile, col_tile, len(row_slices), len(col_slices))
    maps = _tile_mappings(hists.astype(np.float64), clip)
    ylo, yhi, wy = _axis_blend(h, row_slices)
    xlo, xhi, wx = _axis_blend(w, col_slices)
    return RasterImage(clahe_apply(img.pixels, luma, maps, ylo, yhi, wy, xlo, xhi, wx))


def apply_correction(img: RasterImage, kind: CorrectionKind, params: CorrectionParams) -> RasterImage:
    """Apply a single correction with its parameters."""
    if kind is CorrectionKind.CONTRAST:
        return clahe(img, clip=params.clahe_clip, tiles=params.clahe_tiles)
    if kind is CorrectionKind.COLOR:
        return white_balance(img, wb_max_gain=params.wb_max_gain)
    if kind is CorrectionKind.CLARITY:
        return median_filter(img, window=params.median_window)
    if kind is CorrectionKind.BRIGHTNESS:
        return gamma_transform(img, gamma=params.gamma)
    raise InvalidParam(f"unknown correction kind {kind!r}")


def apply_cascade(img: RasterImage, plan: "CascadePlan") -> RasterImage:
    """Apply a cascade plan's corrections sequentially; the empty plan is
    the identity. Raises DuplicateCorrection if a kind repeats."""
    kinds = [kind for kind, _ in plan.steps]
    if len(set(kinds)) != len(kinds):
        raise DuplicateCorrection(f"plan repeats a correction: {[str(k) for k in kinds]}")
    out = img
    for kind, params in plan.steps:
        out = apply_correction(out, kind, params)
    return out
