"""Exception types shared across the package."""


class RaussimError(Exception):
    """Base class for all errors raised by this package."""


class AddressingError(RaussimError, KeyError):
    """A node id does not exist in the graph it was used against."""


class ContractViolation(RaussimError, ValueError):
    """A documented precondition of an operation was broken by the caller."""


class ConfigError(RaussimError, ValueError):
    """Inconsistent or out-of-range run configuration."""


class ParseError(RaussimError, ValueError):
    """A dump file could not be parsed.  Carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StatsError(RaussimError, ValueError):
    """A statistic is undefined for the given data (empty set, zero bonds)."""
