"""Exception types shared across the toolkit."""


class UtilEnhanceError(Exception):
    """Base class for all toolkit errors."""


class MalformedFile(UtilEnhanceError):
    """Image bytes are truncated or carry a bad magic/header."""


class UnsupportedDepth(UtilEnhanceError):
    """Image uses a sample depth or channel layout outside 8-bit RGB."""


class InvalidParam(UtilEnhanceError):
    """A parameter violates its documented domain."""


class DuplicateCorrection(UtilEnhanceError):
    """A cascade plan names the same correction more than once."""


class ImageTooSmall(UtilEnhanceError):
    """Operation needs a larger image (e.g. Sobel requires 3x3)."""


class DegenerateInput(UtilEnhanceError):
    """Statistic undefined: too few samples or zero variance."""


class NoGroundTruth(UtilEnhanceError):
    """Utility/mAP undefined without at least one ground-truth box."""


class SchemaError(UtilEnhanceError):
    """A detections/ground-truth/dictionary JSON file violates its schema."""
