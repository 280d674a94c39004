"""Exception types shared across the package.

The CLI maps these onto exit codes: ValidationError -> 1, ConfigError and
IO failures -> 2.
"""


class PerturbLabError(Exception):
    """Base class for all package errors."""


class ParseError(PerturbLabError):
    """Malformed input file (bad encoding, bad row, misaligned annotation)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(PerturbLabError):
    """An operation precondition or data invariant was violated."""


class ConfigError(PerturbLabError):
    """Invalid or incomplete run configuration."""
