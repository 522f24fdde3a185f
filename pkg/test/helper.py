# pyright: strict

from pathlib import Path

import numpy as np

from spikefraud.data.dataset import Dataset
from spikefraud.data.schema import Schema
from spikefraud.model.csnpc import ModelConfig


def unindent(text: str) -> str:
    """
    Convenience function to unindent multi-line strings in tests, e.g. CSV
    and YAML fixtures written inline.

    Also removes the leading and trailing newline characters so the \"\"\" can
    be on their own lines.

    Example:
    ```python
        unindent(\"\"\"
            a,b
            1,2
        \"\"\")
        # returns "a,b\\n1,2"
    ```
    """

    lines: list[str] = text.splitlines()

    min_indent: int = min(
        (len(line) - len(line.lstrip()))
        for line in lines
        if line.strip()
    )

    unindented: str = '\n'.join(line[min_indent:] for line in lines)

    return unindented[1:-1]


def write_text(directory: Path, name: str, text: str) -> Path:
    path = directory / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding='utf-8')
    return path


def small_schema() -> Schema:
    """Two numeric features, one categorical feature and an age column."""

    return Schema(
        label_column='fraud_bool',
        month_column='month',
        feature_columns=('amount', 'velocity', 'source'),
        sensitive_columns={'age': 'customer_age'},
        categorical_columns={'source': {'INTERNET': 0, 'TELEAPP': 1}},
        month_range=(0, 7),
    )


def small_model_config(
    num_features: int = 15,
    population_size: int = 4,
    timesteps: int = 2,
    relaxed_spikes: bool = False,
) -> ModelConfig:
    return ModelConfig(
        population_size=population_size,
        timesteps=timesteps,
        num_features=num_features,
        decays=(0.5, 0.5, 0.5, 0.5),
        thresholds=(0.5, 0.5, 0.5, 0.5),
        slope=2.0 if relaxed_spikes else 10.0,
        relaxed_spikes=relaxed_spikes,
    )


def make_dataset(
    n: int = 64,
    num_features: int = 15,
    seed: int = 0,
    months: int = 8,
) -> Dataset:
    """Random rows with both classes and every month present."""

    rng = np.random.default_rng(seed)
    labels = np.zeros(n, dtype=np.int64)
    labels[::3] = 1

    return Dataset(
        features=rng.standard_normal((n, num_features)),
        labels=labels,
        month=np.arange(n, dtype=np.int64) % months,
        sensitive={
            'age': rng.choice(np.arange(10.0, 100.0, 10.0), size=n),
            'income': rng.choice(np.arange(1, 10) / 10.0, size=n),
            'employment': rng.choice(np.arange(0.0, 7.0), size=n),
        },
        feature_names=tuple(f'feature_{i:02d}' for i in range(num_features)),
    )
