"""Adapter-side error taxonomy, mirrored onto ktv-extract exit codes."""


class AdapterError(Exception):
    """Base class for adapter failures."""


class ConfigError(AdapterError):
    """Bad configuration: unknown encoder id, invalid rate, bad flag."""


class DecodeError(AdapterError):
    """The video could not be opened or yielded no frames."""


class ShapeError(AdapterError):
    """Computed features are inconsistent; nothing is written."""
