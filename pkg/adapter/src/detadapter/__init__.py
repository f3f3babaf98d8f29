"""Detector adapter: stub and wrapper front-ends emitting detections JSON."""

from .errors import AdapterError, ParseError, SchemaError, SubprocessFailure
from .stub import StubDetectorSpec, run_stub, run_stub_to_file
from .wrap import wrap_external, wrap_external_to_file

__version__ = "0.1.0"
