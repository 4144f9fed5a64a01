"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`RisError`.
Subclasses also inherit from the closest builtin so callers that only know
``ValueError``/``LookupError`` keep working.
"""


class RisError(Exception):
    """Base class for package errors."""


class RangeError(RisError, ValueError):
    """A value lies outside its permitted interval."""


class DomainError(RisError, ValueError):
    """A mathematical precondition (e.g. positivity) is violated."""


class ValidationError(RisError, ValueError):
    """Inputs are structurally invalid (unsorted, empty, mismatched)."""


class ConfigError(ValidationError):
    """A configuration file is malformed; ``field`` names the culprit."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class FrequencyLookupError(RisError, LookupError):
    """Requested frequency is not present in a sampled table."""


class CalibrationError(RisError):
    """A phase look-up table is not monotone in bias."""


class UndefinedSLLError(RisError):
    """Pattern has no secondary maximum outside the main lobe."""


class BoundaryError(RisError):
    """A metric needs samples beyond the edge of the observation grid."""


class UnsupportedOperationError(RisError):
    """Operation requested on a pattern type that cannot support it."""


class FrameRejectedError(RisError):
    """A control frame failed its checksum or structural checks.

    ``index`` is the position of the bad frame in the applied sequence and
    ``applied_state`` the bank state after all frames before it.
    """

    def __init__(self, message: str, index: int | None = None, applied_state=None):
        super().__init__(message)
        self.index = index
        self.applied_state = applied_state
