"""Exception types shared across the package."""


class QmmError(Exception):
    """Base class for all package errors."""


class ConfigurationError(QmmError, ValueError):
    """Invalid scheme or sweep parameters."""


class LengthMismatch(ConfigurationError):
    pass


class UnsupportedSize(ConfigurationError):
    pass


class EmptyFrame(ConfigurationError):
    pass


class DegenerateInput(ConfigurationError):
    pass


class TooFewCodewords(ConfigurationError):
    pass


class NotInCodebook(QmmError, ValueError):
    pass


class UnusedCodeword(QmmError, LookupError):
    """Codeword is valid but lies beyond the 2**f1 entries reachable from bits."""


class GuardRailError(QmmError):
    """A requested enumeration exceeds its configured size limit."""


class CapacityExceeded(GuardRailError):
    pass


class SearchSpaceTooLarge(GuardRailError):
    pass
