"""Run a user-supplied detector command per image and normalize its output.

The wrapped command must print one detection per line to stdout:

    <class> <confidence> <x> <y> <width> <height>

whitespace-separated, with (x, y) the top-left corner in pixels. Blank
lines and lines starting with '#' are skipped. Boxes are converted to the
corner form [x_min, y_min, x_max, y_max] used by the evaluator.
"""

from __future__ import annotations

import shlex
import subprocess
from pathlib import Path

from .core import discover_images, write_detections
from .errors import ParseError, SubprocessFailure


def _parse_line(line: str, where: str) -> dict:
    parts = line.split()
    if len(parts) != 6:
        raise ParseError(f"{where}: expected 'class conf x y w h', got {line!r}")
    cls = parts[0]
    try:
        conf, x, y, w, h = (float(v) for v in parts[1:])
    except ValueError as exc:
        raise ParseError(f"{where}: non-numeric field in {line!r}") from exc
    if not (0.0 <= conf <= 1.0):
        raise ParseError(f"{where}: confidence {conf} outside [0, 1]")
    if w <= 0 or h <= 0:
        raise ParseError(f"{where}: width/height must be positive, got {w} x {h}")
    return {"bbox": [x, y, x + w, y + h], "class": cls, "confidence": conf}


def _command_for(template: str, image: Path) -> str:
    quoted = shlex.quote(str(image))
    if "{image}" in template:
        return template.replace("{image}", quoted)
    return f"{template} {quoted}"


def wrap_external(command_template: str, images_dir: str | Path, timeout: float = 120.0) -> dict:
    """Detections document produced by running the command on every image."""
    entries = []
    for img_id, path in discover_images(images_dir):
        cmd = _command_for(command_template, path)
        try:
            proc = subprocess.run(cmd, shell=True, capture_output=True, text=True, timeout=timeout)
        except subprocess.TimeoutExpired as exc:
            raise SubprocessFailure(f"detector timed out on {path.name}: {cmd}") from exc
        if proc.returncode != 0:
            raise SubprocessFailure(
                f"detector failed on {path.name} (exit {proc.returncode}): {proc.stderr.strip()}"
            )
        detections = []
        for lineno, raw in enumerate(proc.stdout.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            detections.append(_parse_line(line, f"{path.name} line {lineno}"))
        entries.append({"id": img_id, "detections": detections})
    return {"images": entries}


def wrap_external_to_file(command_template: str, images_dir: str | Path, out: str | Path, timeout: float = 120.0) -> None:
    write_detections(wrap_external(command_template, images_dir, timeout=timeout), out)
