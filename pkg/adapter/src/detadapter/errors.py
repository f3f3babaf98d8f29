"""Adapter error types."""


class AdapterError(Exception):
    """Base class for adapter failures."""


class SchemaError(AdapterError):
    """An input or output JSON document violates its schema."""


class SubprocessFailure(AdapterError):
    """The wrapped detector command failed for an image."""


class ParseError(AdapterError):
    """A detector output line could not be parsed."""
