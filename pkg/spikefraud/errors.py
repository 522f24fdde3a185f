# pyright: strict

from typing import Any, Sequence


class SpikeFraudError(Exception):
    """
    Base class for every error this package raises on bad input, bad data or
    a failed run.

    Notes:
    - Programming mistakes are still reported with `assert`
    - `to_record` gives the machine readable form the CLI writes to stderr
    """

    def __init__(self, message: str) -> None:
        super().__init__(message)

        self.message = message

    def __str__(self) -> str:
        return self.message

    def get_kind(self) -> str:
        return type(self).__name__

    def get_details(self) -> dict[str, Any]:
        """Structured fields of the error, rendered into the error record."""

        return {}

    def to_record(self) -> dict[str, Any]:
        return {
            'error': self.get_kind(),
            'message': str(self),
            **self.get_details(),
        }


class DimensionError(SpikeFraudError):
    """
    Raised when a tensor operand does not have the shape an op requires.
    """

    def __init__(
        self,
        op: str,
        axis: str,
        expected: object,
        actual: object,
    ) -> None:
        super().__init__(
            f'{op}: dimension mismatch on axis {axis}: expected {expected}, got {actual}',
        )

        self.op = op
        self.axis = axis
        self.expected = expected
        self.actual = actual

    def get_details(self) -> dict[str, Any]:
        return {
            'op': self.op,
            'axis': self.axis,
            'expected': str(self.expected),
            'actual': str(self.actual),
        }


class ConfigError(SpikeFraudError):
    """
    Raised when a configuration violates one or more of its invariants.
    """

    def __init__(self, subject: str, violations: Sequence[str]) -> None:
        super().__init__(
            f'Invalid {subject}: ' + '; '.join(violations),
        )

        self.subject = subject
        self.violations = tuple(violations)

    def get_details(self) -> dict[str, Any]:
        return {
            'subject': self.subject,
            'violations': list(self.violations),
        }


class InputError(SpikeFraudError):
    """Raised when an operation receives arguments outside its domain."""


class TrainingError(SpikeFraudError):
    """
    Raised when training diverges (the loss becomes non-finite).
    """

    def __init__(self, epoch: int, loss: float) -> None:
        super().__init__(
            f'Training diverged in epoch {epoch}: loss is {loss}',
        )

        self.epoch = epoch
        self.loss = loss

    def get_details(self) -> dict[str, Any]:
        return {
            'epoch': self.epoch,
            'loss': str(self.loss),
        }


class CalibrationError(SpikeFraudError):
    """Raised when a decision threshold cannot be calibrated."""


class IngestionError(SpikeFraudError):
    """
    Raised when a data row cannot be encoded.
    """

    def __init__(self, row: int, column: str, value: object, reason: str) -> None:
        super().__init__(
            f'Row {row}, column {column!r}: {reason} ({value!r})',
        )

        self.row = row
        self.column = column
        self.value = value
        self.reason = reason

    def get_details(self) -> dict[str, Any]:
        return {
            'row': self.row,
            'column': self.column,
            'value': str(self.value),
        }


class SchemaError(SpikeFraudError):
    """Raised when a data file or schema file does not match the schema."""


class SplitError(SpikeFraudError):
    """Raised when a split would leave one side empty."""


class GenerationError(SpikeFraudError):
    """Raised when synthetic data cannot be generated as requested."""


class IntegrityError(SpikeFraudError):
    """Raised when a persisted artifact is corrupted or inconsistent."""


class TrialError(SpikeFraudError):
    """Raised by an evaluator when a hyperparameter trial cannot be scored."""
