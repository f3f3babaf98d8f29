"""Synthetic scene builders shared by the demo scripts."""

from pathlib import Path

import numpy as np

from utilenhance import RasterImage

OUTPUT = Path(__file__).parent / "output"


def murky_scene(seed: int, h: int = 120, w: int = 160, contrast: float = 1.0,
                brightness: float = 0.0, cast: float = 1.0) -> RasterImage:
    """Low-contrast scene with a blue-green water cast and a few 'objects'.

    The contrast knob scales the sharp texture (drives the gradient
    feature), cast blends the channel imbalance toward neutral, and the
    smooth blob field varies independently so the features decorrelate
    across a batch of scenes.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    phase = rng.uniform(0, 2 * np.pi)
    stripes = np.sign(np.sin(xx / 3.0 + phase)) * 9.0 * contrast
    field = 14.0 * np.sin(xx / 31.0 + phase) * np.cos(yy / 23.0)
    amp = rng.uniform(12, 30)
    for _ in range(4):
        cy, cx, r = rng.uniform(0, h), rng.uniform(0, w), rng.uniform(8, 22)
        field += amp * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * r * r))
    lum = 74.0 + brightness + stripes + field + rng.normal(0, 2.5, (h, w))
    gains = 1.0 + cast * np.array([-0.48, -0.04, 0.14])
    px = lum[:, :, None] * gains[None, None, :]
    return RasterImage(np.clip(np.rint(px), 0, 255).astype(np.uint8))


def ensure_output() -> Path:
    OUTPUT.mkdir(exist_ok=True)
    return OUTPUT
