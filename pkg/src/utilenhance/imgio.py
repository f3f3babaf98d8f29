"""Image decode/encode and the shared pixel representation.

Images are 8-bit RGB, held as immutable numpy arrays. All quantization in
the toolkit goes through :func:`quantize_u8` (round-half-to-even, then
clamp to [0, 255]) so every operator shares one rounding convention.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from ._kernels import luma_u8
from .errors import MalformedFile, UnsupportedDepth

# Luma weights, also used by the brightness feature.
LUMA_WEIGHTS = (0.299, 0.587, 0.114)
_LUMA_LUTS = tuple(w * np.arange(256, dtype=np.float64) for w in LUMA_WEIGHTS)

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def quantize_u8(values: np.ndarray) -> np.ndarray:
    """Round half-to-even and clamp into [0, 255] as uint8."""
    return np.clip(np.rint(values), 0, 255).astype(np.uint8)


@dataclass(frozen=True)
class RasterImage:
    """8-bit RGB pixel grid, shape (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (h, w, 3) pixel array, got {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if px.dtype != np.uint8:
            raise ValueError(f"expected uint8 samples, got {px.dtype}")
        px = px if px.flags.c_contiguous else np.ascontiguousarray(px)
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class GrayImage:
    """8-bit single-channel grid, shape (height, width)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise ValueError(f"expected (h, w) pixel array, got {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if px.dtype != np.uint8:
            raise ValueError(f"expected uint8 samples, got {px.dtype}")
        px = px if px.flags.c_contiguous else np.ascontiguousarray(px)
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def luma_f(img: RasterImage) -> np.ndarray:
    """Unquantized luma plane 0.299R + 0.587G + 0.114B as float64."""
    t = np.take(_LUMA_LUTS[0], img.pixels[:, :, 0])
    t += np.take(_LUMA_LUTS[1], img.pixels[:, :, 1])
    t += np.take(_LUMA_LUTS[2], img.pixels[:, :, 2])
    return t


def to_luma(img: RasterImage) -> GrayImage:
    """Quantized luma channel (round-half-to-even of the weighted sum)."""
    return GrayImage(luma_u8(img.pixels, *_LUMA_LUTS))


def _decode_ppm(data: bytes) -> RasterImage:
    # Binary PPM (P6), maxval 255. Header tokens may be separated by
    # whitespace and '#' comments; a single whitespace byte ends the header.
    if not data.startswith(b"P6"):
        raise MalformedFile("not a P6 PPM (bad magic)")
    pos = 2
    fields: list[int] = []
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            eol = data.find(b"\n", pos)
            if eol == -1:
                raise MalformedFile("unterminated comment in PPM header")
            pos = eol + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token.isdigit():
            raise MalformedFile(f"bad PPM header token {token!r}")
        fields.append(int(token))
    if pos >= len(data):
        raise MalformedFile("truncated PPM header")
    pos += 1  # single whitespace byte after maxval
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise MalformedFile("PPM dimensions must be positive")
    if maxval != 255:
        raise UnsupportedDepth(f"PPM maxval {maxval} unsupported (need 255)")
    need = width * height * 3
    raw = data[pos : pos + need]
    if len(raw) < need:
        raise MalformedFile(f"PPM pixel data truncated ({len(raw)} of {need} bytes)")
    px = np.frombuffer(raw, dtype=np.uint8).reshape(height, width, 3)
    return RasterImage(px.copy())


def _encode_ppm(img: RasterImage) -> bytes:
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


def _decode_png(data: bytes) -> RasterImage:
    if not data.startswith(_PNG_MAGIC):
        raise MalformedFile("not a PNG (bad magic)")
    # Peek IHDR directly: Pillow silently narrows some depths, and the
    # contract is to reject anything that is not 8-bit RGB-expressible.
    if len(data) < 26 or data[12:16] != b"IHDR":
        raise MalformedFile("PNG missing IHDR chunk")
    bit_depth = data[24]
    color_type = data[25]
    if color_type not in (0, 2, 3):  # gray, RGB, palette
        raise UnsupportedDepth(f"PNG color type {color_type} unsupported (alpha is out of scope)")
    # Palette entries are 8-bit RGB whatever the index depth; gray/RGB
    # samples must be 8-bit themselves.
    if color_type != 3 and bit_depth != 8:
        raise UnsupportedDepth(f"PNG bit depth {bit_depth} unsupported (need 8)")
    try:
        with Image.open(io.BytesIO(data)) as im:
            im.load()
            if im.mode != "RGB":
                im = im.convert("RGB")
            px = np.asarray(im, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise MalformedFile(f"PNG decode failed: {exc}") from exc
    return RasterImage(px)


def _encode_png(img: RasterImage) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(img.pixels, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def decode(data: bytes, format: str) -> RasterImage:
    """Decode PNG or binary PPM bytes into a RasterImage.

    Raises MalformedFile for truncated/bad input and UnsupportedDepth for
    non-8-bit or alpha-carrying variants. Grayscale and paletted PNGs are
    expanded to RGB.
    """
    if format == "ppm":
        return _decode_ppm(data)
    if format == "png":
        return _decode_png(data)
    raise ValueError(f"unknown format {format!r} (expected 'png' or 'ppm')")


def encode(img: RasterImage, format: str) -> bytes:
    """Encode to PNG or binary PPM bytes. decode(encode(x)) is the identity."""
    if format == "ppm":
        return _encode_ppm(img)
    if format == "png":
        return _encode_png(img)
    raise ValueError(f"unknown format {format!r} (expected 'png' or 'ppm')")


def sniff_format(data: bytes) -> str:
    """Identify PNG vs PPM from magic bytes."""
    if data.startswith(_PNG_MAGIC):
        return "png"
    if data.startswith(b"P6"):
        return "ppm"
    raise MalformedFile("unrecognized image magic (expected PNG or P6 PPM)")


def load_image(path: str | Path) -> RasterImage:
    """Read an image file, picking the codec from the magic bytes."""
    data = Path(path).read_bytes()
    return decode(data, sniff_format(data))


def save_image(img: RasterImage, path: str | Path) -> None:
    """Write an image, picking the codec from the file extension."""
    path = Path(path)
    fmt = "ppm" if path.suffix.lower() == ".ppm" else "png"
    path.write_bytes(encode(img, fmt))
