"""adapter CLI: emit schema-conformant detections from a stub or a wrapped
real detector."""

from __future__ import annotations

import argparse
import sys

from .errors import AdapterError
from .stub import StubDetectorSpec, run_stub_to_file
from .wrap import wrap_external_to_file


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adapter", description="Detector-to-JSON bridge")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stub", help="deterministic feature-sensitive stand-in detector")
    p.add_argument("--gt", required=True, help="ground-truth JSON file")
    p.add_argument("--images", required=True, help="image directory")
    p.add_argument("--spec", help="stub spec JSON (defaults echo ground truth)")
    p.add_argument("--out", required=True, help="detections JSON output path")

    p = sub.add_parser("wrap", help="run an external detector command per image")
    p.add_argument("--cmd", required=True, help="command template; {image} expands to the file path")
    p.add_argument("--images", required=True, help="image directory")
    p.add_argument("--out", required=True, help="detections JSON output path")
    p.add_argument("--timeout", type=float, default=120.0, help="per-image timeout in seconds")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "stub":
            spec = StubDetectorSpec.load(args.spec) if args.spec else StubDetectorSpec()
            run_stub_to_file(args.images, args.gt, spec, args.out)
        else:
            wrap_external_to_file(args.cmd, args.images, args.out, timeout=args.timeout)
    except AdapterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
