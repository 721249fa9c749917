"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, bad input data
exits 2, anything else exits 3.
"""


class LegalSbdError(Exception):
    """Base class for all package errors."""


class UsageError(LegalSbdError):
    """Invalid invocation: bad flags, unknown config keys, missing files."""


class DataError(LegalSbdError):
    """Invalid input data: malformed corpus lines, span violations,
    unsupported model files, empty training sets."""


class TrainingError(LegalSbdError):
    """Optimization failed irrecoverably (non-finite objective)."""
