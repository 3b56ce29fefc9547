"""Exception types shared across the package."""


class WindriskError(Exception):
    """Base class for all package errors."""


class ConfigError(WindriskError):
    """Invalid configuration: bad limits, malformed set corners, broken files."""


class InputError(WindriskError):
    """Invalid runtime input: non-finite values, empty command lists, bad ranges."""


class ParseError(InputError):
    """A file could not be parsed. Carries the offending line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InsufficientDataError(WindriskError):
    """A windowed statistic was requested over an empty window."""


class UncoveredInputError(WindriskError):
    """No rule fires for the given inputs; caller should fall back to a decision map."""
