"""Exception types shared across the package.

The CLI maps these onto exit codes: UsageError -> 1, DataError (and its
subclasses) -> 2.
"""


class UsageError(ValueError):
    """Caller passed arguments that violate an operation's contract."""


class DataError(ValueError):
    """Input data is malformed or inconsistent (shapes, values, files)."""


class ParseError(DataError):
    """A file could not be parsed; carries the offending line number."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix += str(path)
        if line is not None:
            prefix += f":{line}"
        if prefix:
            message = f"{prefix}: {message}"
        super().__init__(message)


class DegenerateRatesError(UsageError):
    """The two convergence rates coincide, so the combined bound is undefined."""
