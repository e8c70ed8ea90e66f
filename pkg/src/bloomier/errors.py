"""Exception types shared across the package."""


class FilterError(Exception):
    """Base class for all bloomier errors."""


class InputError(FilterError, ValueError):
    """Invalid caller-supplied data: bad parameters, duplicate keys, out-of-range values."""


class UnsupportedSizeError(InputError):
    """An operation was asked to run outside its documented size budget."""


class BuildError(FilterError, RuntimeError):
    """A randomized build exhausted its retry budget.

    Attributes carry diagnostics: ``attempts`` (graph regenerations, hash
    redraws or rebuild iterations, depending on the build) and optionally
    ``bucket`` for failures inside a bucketed build.
    """

    def __init__(self, message: str, *, attempts: int | None = None, bucket: int | None = None):
        super().__init__(message)
        self.attempts = attempts
        self.bucket = bucket


class UnknownKeyError(FilterError, KeyError):
    """An update referenced a key outside the filter's stored support."""


class FormatError(FilterError, ValueError):
    """A serialized filter image is malformed.

    ``offset`` is the byte position at which decoding failed.
    """

    def __init__(self, message: str, *, offset: int = 0):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class UnsupportedSchemeError(FormatError):
    """The image's scheme byte names a scheme this library does not know."""
