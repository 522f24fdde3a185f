# pyright: strict

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import numpy.typing as npt
import pandas as pd

from spikefraud.core.tensor import Array
from spikefraud.data.schema import Schema
from spikefraud.errors import IngestionError, InputError, SchemaError, SplitError


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    """
    Encoded rows of a fraud data file.

    Attributes:
        features: `[n, num_features]` model inputs
        labels: `[n]` binary fraud labels
        month: `[n]` integer month of each row
        sensitive: fairness attribute (age, income, employment) to `[n]` values
        feature_names: column name of each feature
    """

    features: Array
    labels: npt.NDArray[np.int64]
    month: npt.NDArray[np.int64]
    sensitive: dict[str, Array] = field(default_factory=lambda: {})
    feature_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        n = self.labels.shape[0]
        assert self.features.ndim == 2 and self.features.shape[0] == n, \
            f'features must be [{n}, F], got {self.features.shape}'
        assert self.month.shape == (n,), f'month must be [{n}], got {self.month.shape}'
        for attribute, values in self.sensitive.items():
            assert values.shape == (n,), f'{attribute} must be [{n}], got {values.shape}'
        assert not self.feature_names or len(self.feature_names) == self.features.shape[1], \
            'one feature name per feature column'

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    @property
    def num_features(self) -> int:
        return int(self.features.shape[1])

    def take(self, rows: npt.ArrayLike) -> 'Dataset':
        """Subset of the rows selected by an index or boolean mask, order kept."""

        index = np.asarray(rows)
        return Dataset(
            features=self.features[index],
            labels=self.labels[index],
            month=self.month[index],
            sensitive={attribute: values[index] for attribute, values in self.sensitive.items()},
            feature_names=self.feature_names,
        )


@dataclass(frozen=True)
class NormStats:
    """Per-feature z-score statistics fit on a training split."""

    mean: Array
    std: Array

    def apply(self, dataset: Dataset) -> Dataset:
        return replace(dataset, features=(dataset.features - self.mean) / self.std)

    def to_data(self) -> dict[str, Any]:
        return {
            'mean': [float(v) for v in self.mean],
            'std': [float(v) for v in self.std],
        }

    @classmethod
    def create_from_data(cls, data: Mapping[str, Any]) -> 'NormStats':
        return cls(
            mean=np.asarray(data['mean'], dtype=np.float64),
            std=np.asarray(data['std'], dtype=np.float64),
        )


def _first_bad_row(mask: npt.NDArray[np.bool_]) -> int:
    return int(np.flatnonzero(mask)[0])


def _encode_column(frame: pd.DataFrame, column: str, schema: Schema) -> Array:
    raw = frame[column].str.strip()

    missing = (raw == '').to_numpy()
    if missing.any():
        row = _first_bad_row(missing)
        raise IngestionError(row, column, raw.iloc[row], 'missing value')

    codes = schema.categorical_columns.get(column)
    if codes is not None:
        encoded = raw.map(codes)
        unknown = encoded.isna().to_numpy()
        if unknown.any():
            row = _first_bad_row(unknown)
            raise IngestionError(row, column, raw.iloc[row], 'unknown category')
        return encoded.to_numpy(dtype=np.float64)

    values = pd.to_numeric(raw, errors='coerce').to_numpy(dtype=np.float64)
    not_finite = ~np.isfinite(values)
    if not_finite.any():
        row = _first_bad_row(not_finite)
        raise IngestionError(row, column, raw.iloc[row], 'not a finite number')

    return values


def _encode_integers(
    values: Array,
    frame: pd.DataFrame,
    column: str,
    allowed: tuple[int, int],
) -> npt.NDArray[np.int64]:
    low, high = allowed
    bad = (values != np.round(values)) | (values < low) | (values > high)
    if bad.any():
        row = _first_bad_row(bad)
        raise IngestionError(row, column, frame[column].iloc[row], f'expected an integer in [{low}, {high}]')

    return values.astype(np.int64)


def load_csv(path: Path, schema: Schema) -> Dataset:
    """
    Read a comma separated file with a header row and encode it with the
    schema.

    Notes:
    - Row indices in errors are 0-based data rows (the header excluded)
    - Extra columns are ignored; row order is preserved
    """

    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except pd.errors.EmptyDataError as e:
        raise SchemaError(f'Data file {path} is empty') from e
    except OSError as e:
        raise SchemaError(f'Cannot read data file {path}: {e}') from e

    missing = [column for column in schema.get_required_columns() if column not in frame.columns]
    if missing:
        raise SchemaError(f'Data file {path} is missing column(s) {missing}')
    if frame.shape[0] == 0:
        raise SchemaError(f'Data file {path} has no data rows')

    encoded = {
        column: _encode_column(frame, column, schema)
        for column in schema.get_required_columns()
    }

    labels = _encode_integers(encoded[schema.label_column], frame, schema.label_column, (0, 1))
    month = _encode_integers(encoded[schema.month_column], frame, schema.month_column, schema.month_range)

    features = np.column_stack([encoded[column] for column in schema.feature_columns])
    logger.info('Loaded %d rows with %d features from %s', labels.shape[0], features.shape[1], path)

    return Dataset(
        features=features,
        labels=labels,
        month=month,
        sensitive={
            attribute: encoded[column]
            for attribute, column in schema.sensitive_columns.items()
        },
        feature_names=schema.feature_columns,
    )


def _decode_column(values: Array, column: str, schema: Schema) -> list[Any] | Array:
    codes = schema.categorical_columns.get(column)
    if codes is None:
        return values

    names = {code: name for name, code in codes.items()}
    decoded: list[Any] = []
    for row, value in enumerate(values):
        name = names.get(int(round(float(value))))
        if name is None:
            raise InputError(f'Row {row}, column {column!r}: no category has code {value}')
        decoded.append(name)

    return decoded


def write_csv(dataset: Dataset, path: Path, schema: Schema) -> None:
    """
    Write a dataset in the layout `load_csv` reads; categorical codes are
    written as their category names.
    """

    if dataset.num_features != len(schema.feature_columns):
        raise SchemaError(
            f'Dataset has {dataset.num_features} features, schema has {len(schema.feature_columns)}',
        )

    columns: dict[str, Any] = {}
    for index, column in enumerate(schema.feature_columns):
        columns[column] = _decode_column(dataset.features[:, index], column, schema)

    for attribute, column in schema.sensitive_columns.items():
        if column in columns:
            continue
        if attribute not in dataset.sensitive:
            raise SchemaError(f'Dataset has no {attribute!r} values for column {column!r}')
        columns[column] = _decode_column(dataset.sensitive[attribute], column, schema)

    columns[schema.label_column] = dataset.labels
    columns[schema.month_column] = dataset.month

    path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(columns).to_csv(path, index=False, lineterminator='\n')


def temporal_split(dataset: Dataset, train_months: int = 6) -> tuple[Dataset, Dataset]:
    """
    Rows with `month < train_months` train, the rest test; no shuffling.
    """

    in_train = dataset.month < train_months
    train, test = dataset.take(in_train), dataset.take(~in_train)

    if len(train) == 0 or len(test) == 0:
        raise SplitError(
            f'Split at month {train_months} leaves {len(train)} train and {len(test)} test rows',
        )

    return train, test


def holdout_last_month(train: Dataset) -> tuple[Dataset, Dataset]:
    """Hold out the last month of a training split as validation."""

    if len(train) == 0:
        raise SplitError('Cannot hold out a validation month of an empty split')

    last_month = int(train.month.max())
    return temporal_split(train, last_month)


def normalize(train: Dataset, test: Dataset) -> tuple[Dataset, Dataset, NormStats]:
    """
    Z-score every feature with statistics of the train split only.

    Notes:
    - A constant feature (std 0) is only centered
    - Not idempotent: normalizing normalized data refits the statistics
    """

    if len(train) == 0:
        raise InputError('Cannot fit normalization statistics on an empty train split')

    mean = train.features.mean(axis=0)
    std = train.features.std(axis=0)
    std = np.where(std > 0.0, std, 1.0)

    stats = NormStats(mean=mean, std=std)
    return stats.apply(train), stats.apply(test), stats
