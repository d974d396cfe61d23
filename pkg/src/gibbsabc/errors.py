"""Exception types shared across the package.

InputError covers anything a caller got wrong (bad files, invalid
arguments); the CLI maps it to exit code 2. Runtime failures keep the
stdlib RuntimeError family and map to exit code 3.
"""


class InputError(ValueError):
    """Invalid user input: bad value, malformed file, mismatched sizes."""


class GraphFormatError(InputError):
    """Malformed contact-graph file; carries the offending line number."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class EnumerationLimitError(InputError):
    """State space too large for the brute-force enumeration oracle."""


class NoAcceptanceError(RuntimeError):
    """An estimator was asked for but the run accepted nothing."""


class EstimatorUndefinedError(RuntimeError):
    """The plug-in Bayes factor is undefined (zero count in the denominator)."""
