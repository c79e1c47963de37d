"""Exception hierarchy shared across the package.

Each class carries the process exit code the CLI maps it to, so failure
classes stay stable across releases.
"""


class RetentionError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class UsageError(RetentionError):
    """Invalid request: bad argument values, intractable search sizes."""

    exit_code = 2


class InputError(RetentionError):
    """Missing, unreadable, truncated or corrupt input files."""

    exit_code = 3


class VersionError(InputError):
    """Persisted document declares an unsupported format version."""


class ChecksumError(InputError):
    """Persisted document failed its payload checksum."""


class SchemaError(RetentionError):
    """Schema, catalog or fingerprint mismatches; unknown categories."""

    exit_code = 4


class NumericError(RetentionError):
    """Non-finite values where finite ones are required; divergence."""

    exit_code = 5
