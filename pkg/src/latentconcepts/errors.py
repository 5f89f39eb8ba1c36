"""Exception hierarchy shared across the toolkit.

DataError covers anything wrong with user-supplied inputs (files, configs);
InvariantError marks internal consistency failures that should never happen
on valid inputs. The CLI maps them to distinct exit codes.
"""


class LatentConceptsError(Exception):
    """Base class for all toolkit errors."""


class DataError(LatentConceptsError):
    """Malformed or inconsistent input data."""


class UsageError(LatentConceptsError):
    """Invalid configuration or CLI arguments."""


class InvariantError(LatentConceptsError):
    """An internal invariant was violated."""


# ECX file format errors, one class per failure mode so callers can
# distinguish them without string matching.

class EcxError(DataError):
    """Base class for embedding-file format errors."""


class BadMagicError(EcxError):
    pass


class UnsupportedVersionError(EcxError):
    pass


class TruncatedFileError(EcxError):
    pass


class PayloadError(EcxError):
    """Non-finite values or otherwise invalid record payloads."""
