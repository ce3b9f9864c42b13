"""Typed error hierarchy shared by all frad modules.

Every error carries an ``exit_code`` so the CLI can map failures onto its
documented process exit codes: 1 usage, 2 file I/O, 3 schema/validation,
4 numerical failure.
"""


class FradError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class DataFileError(FradError):
    """A file is missing, unreadable, or unwritable."""

    exit_code = 2


class SchemaError(FradError):
    """Input violates a structural contract (shape, header, value domain)."""

    exit_code = 3


class MalformedRowError(SchemaError):
    """A CSV row could not be parsed; the message names the 1-based row."""

    def __init__(self, row: int, detail: str):
        super().__init__(f"row {row}: {detail}")
        self.row = row


class UnknownLabelError(SchemaError):
    """A label value outside {0, 1, 2} was read from a file."""

    def __init__(self, row: int, value: str):
        super().__init__(f"row {row}: unknown label {value!r} (expected 0, 1 or 2)")
        self.row = row


class NanFieldError(SchemaError):
    """A non-finite feature value was read from a file."""

    def __init__(self, row: int, column: str):
        super().__init__(f"row {row}: non-finite value in column {column!r}")
        self.row = row


class InvalidLabelError(SchemaError):
    """A label id outside {0, 1, 2} was passed to a decode/validation path."""


class EmptyInputError(SchemaError):
    """An operation that needs at least one row received none."""


class ShapeMismatchError(SchemaError):
    """Array arguments disagree on row count or feature arity."""


class FeatureMismatchError(SchemaError):
    """A model file's feature names do not match the data it is applied to."""


class NumericalFailure(FradError):
    """A numerical routine could not produce a usable result."""

    exit_code = 4
