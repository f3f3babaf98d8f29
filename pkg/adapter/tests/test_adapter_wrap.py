"""External-command wrapper: parsing, normalization, failure reporting."""

import json
import os
import stat
import sys
from pathlib import Path

import pytest

from detadapter import ParseError, SubprocessFailure, wrap_external
from detadapter.cli import main
from detadapter.core import validate_detections_doc

from _adapter_fixtures import make_dataset, run_enhancer

FAKE_DETECTOR = """\
import sys
name = sys.argv[1]
print("# fake detector output")
print()
print("urchin 0.90 4 6 20 30")
print("scallop 0.25 40 8 12 10")
"""


def _write_script(tmp_path: Path, body: str) -> Path:
    script = tmp_path / "fake_det.py"
    script.write_text(body)
    return script


def test_wrap_normalizes_xywh_to_corners(tmp_path, enhancer_available):
    images, _ = make_dataset(tmp_path, n=2)
    script = _write_script(tmp_path, FAKE_DETECTOR)
    doc = wrap_external(f"{sys.executable} {script} {{image}}", images)
    assert [e["id"] for e in doc["images"]] == ["img000", "img001"]
    dets = doc["images"][0]["detections"]
    assert dets[0] == {"bbox": [4.0, 6.0, 24.0, 36.0], "class": "urchin", "confidence": 0.9}
    assert dets[1]["bbox"] == [40.0, 8.0, 52.0, 18.0]
    validate_detections_doc(doc)


def test_wrap_cli_writes_schema_valid_file(tmp_path, enhancer_available):
    images, gt_path = make_dataset(tmp_path, n=2)
    script = _write_script(tmp_path, FAKE_DETECTOR)
    out = tmp_path / "dets.json"
    code = main(["wrap", "--cmd", f"{sys.executable} {script} {{image}}", "--images", str(images), "--out", str(out)])
    assert code == 0
    proc = run_enhancer("evaluate", "--dets", str(out), "--gt", str(gt_path))
    assert proc.returncode == 0, proc.stderr


def test_wrap_appends_image_when_no_placeholder(tmp_path, enhancer_available):
    images, _ = make_dataset(tmp_path, n=1)
    script = _write_script(tmp_path, FAKE_DETECTOR)
    doc = wrap_external(f"{sys.executable} {script}", images)
    assert doc["images"][0]["detections"]


def test_wrap_failure_names_image(tmp_path, enhancer_available):
    images, _ = make_dataset(tmp_path, n=1)
    script = _write_script(tmp_path, "import sys; sys.exit(3)")
    with pytest.raises(SubprocessFailure) as err:
        wrap_external(f"{sys.executable} {script} {{image}}", images)
    assert "img000.ppm" in str(err.value)


@pytest.mark.parametrize(
    "line",
    [
        "urchin 0.9 4 6 20",          # missing field
        "urchin high 4 6 20 30",      # non-numeric confidence
        "urchin 1.4 4 6 20 30",       # confidence out of range
        "urchin 0.9 4 6 -20 30",      # negative width
    ],
)
def test_wrap_parse_errors_carry_context(tmp_path, line, enhancer_available):
    images, _ = make_dataset(tmp_path, n=1)
    script = _write_script(tmp_path, f"print({line!r})")
    with pytest.raises(ParseError) as err:
        wrap_external(f"{sys.executable} {script} {{image}}", images)
    assert "img000.ppm line 1" in str(err.value)


def test_wrap_cli_reports_errors(tmp_path, capsys, enhancer_available):
    images, _ = make_dataset(tmp_path, n=1)
    script = _write_script(tmp_path, "import sys; sys.exit(1)")
    code = main(["wrap", "--cmd", f"{sys.executable} {script} {{image}}", "--images", str(images), "--out", str(tmp_path / "o.json")])
    assert code == 1
    assert "error:" in capsys.readouterr().err
