# pyright: strict

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from spikefraud.config.serialization import YamlDeserializer
from spikefraud.errors import SchemaError
from spikefraud.system.file import FileReader


SENSITIVE_ATTRIBUTES = ('age', 'income', 'employment')

BAF_FEATURE_COLUMNS = (
    'income',
    'name_email_similarity',
    'prev_address_months_count',
    'current_address_months_count',
    'customer_age',
    'days_since_request',
    'intended_balcon_amount',
    'payment_type',
    'zip_count_4w',
    'velocity_6h',
    'velocity_24h',
    'velocity_4w',
    'bank_branch_count_8w',
    'date_of_birth_distinct_emails_4w',
    'employment_status',
    'credit_risk_score',
    'email_is_free',
    'housing_status',
    'phone_home_valid',
    'phone_mobile_valid',
    'bank_months_count',
    'has_other_cards',
    'proposed_credit_limit',
    'foreign_request',
    'source',
    'session_length_in_minutes',
    'device_os',
    'keep_alive_session',
    'device_distinct_emails_8w',
    'device_fraud_count',
)

BAF_CATEGORIES: dict[str, dict[str, int]] = {
    'payment_type': {f'A{c}': i for i, c in enumerate('ABCDE')},
    'employment_status': {f'C{c}': i for i, c in enumerate('ABCDEFG')},
    'housing_status': {f'B{c}': i for i, c in enumerate('ABCDEFG')},
    'source': {'INTERNET': 0, 'TELEAPP': 1},
    'device_os': {'windows': 0, 'other': 1, 'linux': 2, 'macintosh': 3, 'x11': 4},
}


@dataclass(frozen=True)
class Schema:
    """
    Describes how the columns of a data file map onto a `Dataset`.

    Attributes:
        label_column: binary fraud label column
        month_column: integer month column used for the temporal split
        feature_columns: ordered model input columns
        sensitive_columns: fairness attribute (age, income, employment) to
            column name; these columns may also be features
        categorical_columns: column to category -> integer code map
        month_range: inclusive (first, last) month
    """

    label_column: str
    month_column: str
    feature_columns: tuple[str, ...]
    sensitive_columns: dict[str, str] = field(default_factory=lambda: {})
    categorical_columns: dict[str, dict[str, int]] = field(default_factory=lambda: {})
    month_range: tuple[int, int] = (0, 7)

    def __post_init__(self) -> None:
        problems: list[str] = []

        reserved = [self.label_column, self.month_column, *self.sensitive_columns.values()]
        if len(set(reserved)) != len(reserved):
            problems.append(
                'label, month and sensitive columns must be distinct from each other',
            )
        for column in (self.label_column, self.month_column):
            if column in self.feature_columns:
                problems.append(f'{column!r} cannot be both a reserved column and a feature')
        if len(set(self.feature_columns)) != len(self.feature_columns):
            problems.append('feature columns must be unique')
        for attribute in self.sensitive_columns:
            if attribute not in SENSITIVE_ATTRIBUTES:
                problems.append(
                    f'unknown sensitive attribute {attribute!r}, expected one of {SENSITIVE_ATTRIBUTES}',
                )
        for column, codes in self.categorical_columns.items():
            if len(set(codes.values())) != len(codes):
                problems.append(f'category codes of {column!r} are not unique')
        if self.month_range[0] > self.month_range[1]:
            problems.append(f'invalid month range {self.month_range}')

        if problems:
            raise SchemaError('Invalid schema: ' + '; '.join(problems))

    def get_required_columns(self) -> tuple[str, ...]:
        columns = [*self.feature_columns]
        for column in (*self.sensitive_columns.values(), self.label_column, self.month_column):
            if column not in columns:
                columns.append(column)

        return tuple(columns)

    def to_data(self) -> dict[str, Any]:
        return {
            'label_column': self.label_column,
            'month_column': self.month_column,
            'feature_columns': list(self.feature_columns),
            'sensitive_columns': dict(self.sensitive_columns),
            'categorical_columns': {
                column: dict(codes)
                for column, codes in self.categorical_columns.items()
            },
            'month_range': list(self.month_range),
        }

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form, stored in checkpoints."""

        canonical = json.dumps(self.to_data(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    @classmethod
    def create_from_data(cls, data: object) -> 'Schema':
        if not isinstance(data, Mapping):
            raise SchemaError('Schema must be a mapping of schema fields')
        fields: Mapping[str, Any] = data  # pyright: ignore[reportUnknownVariableType]

        for key in ('label_column', 'month_column', 'feature_columns'):
            if key not in fields:
                raise SchemaError(f'Schema is missing the {key!r} field')

        feature_columns = fields['feature_columns']
        if not isinstance(feature_columns, list) or not feature_columns:
            raise SchemaError('feature_columns must be a non-empty list of column names')

        month_range = fields.get('month_range', [0, 7])
        categorical: Mapping[str, Mapping[str, Any]] = fields.get('categorical_columns') or {}

        try:
            return cls(
                label_column=str(fields['label_column']),
                month_column=str(fields['month_column']),
                feature_columns=tuple(str(c) for c in feature_columns),  # pyright: ignore[reportUnknownArgumentType, reportUnknownVariableType]
                sensitive_columns={
                    str(k): str(v)
                    for k, v in (fields.get('sensitive_columns') or {}).items()
                },
                categorical_columns={
                    str(column): {str(name): int(code) for name, code in codes.items()}
                    for column, codes in categorical.items()
                },
                month_range=(int(month_range[0]), int(month_range[1])),
            )
        except (AttributeError, IndexError, KeyError, TypeError, ValueError) as e:
            raise SchemaError(f'Malformed schema: {e}') from e

    @classmethod
    def create_baf(cls) -> 'Schema':
        """Column layout of the Bank Account Fraud dataset suite."""

        return cls(
            label_column='fraud_bool',
            month_column='month',
            feature_columns=BAF_FEATURE_COLUMNS,
            sensitive_columns={
                'age': 'customer_age',
                'income': 'income',
                'employment': 'employment_status',
            },
            categorical_columns={
                column: dict(codes)
                for column, codes in BAF_CATEGORIES.items()
            },
        )

    @classmethod
    def create_synthetic(cls, num_features: int) -> 'Schema':
        """Column layout written by the synthetic data generator."""

        return cls(
            label_column='fraud_bool',
            month_column='month',
            feature_columns=tuple(f'feature_{i:02d}' for i in range(num_features)),
            sensitive_columns={
                'age': 'customer_age',
                'income': 'income',
                'employment': 'employment_status',
            },
        )


def load_schema(file_reader: FileReader, path: Path) -> Schema:
    """Read a schema file (JSON, or YAML which is a superset of it)."""

    try:
        data = YamlDeserializer().get_data_from_file(file_reader, path)
    except (OSError, yaml.YAMLError) as e:
        raise SchemaError(f'Cannot read schema file {path}: {e}') from e

    return Schema.create_from_data(data)
