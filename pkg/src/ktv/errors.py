"""Exception types shared across the package."""


class KTVError(Exception):
    """Base class for every error this package raises deliberately."""


class ValidationError(KTVError):
    """An input value violates a documented invariant.

    ``code`` is a short machine-readable tag; the message names the
    offending field or value.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class FormatError(KTVError):
    """A KTVF file is malformed.

    ``code`` identifies the first defect found: one of ``bad_magic``,
    ``unsupported_version``, ``truncated``, ``bad_header``,
    ``payload_length_mismatch``.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class MissingInputError(KTVError):
    """A file the run depends on does not exist."""


class InternalError(KTVError):
    """An internal consistency check failed; indicates a bug, not bad input."""
