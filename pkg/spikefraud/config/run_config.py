# pyright: strict

from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping

import yaml

from spikefraud.config.serialization import YamlDeserializer
from spikefraud.errors import ConfigError
from spikefraud.fairness.metrics import DEFAULT_ALPHAS
from spikefraud.system.file import FileReader


PATH_FIELDS = ('data', 'schema', 'out', 'hyper', 'checkpoint')
INT_FIELDS = (
    'seed',
    'population',
    'timesteps',
    'epochs',
    'batch',
    'train_months',
    'early_stop_patience',
    'budget',
)
FLOAT_FIELDS = ('target_fpr', 'q_alpha', 'q_gamma', 'epsilon', 'fairness_weight')


@dataclass(frozen=True)
class RunConfig:
    """
    Settings shared by the commands.

    Notes:
    - Every field has a default; a run config file overrides the defaults
      and command line flags override the file
    - `schema` None means the Bank Account Fraud column layout
    - `hyper` names a HyperConfig file (e.g. the best config written by
      `optimize`); None means the default neuron and optimizer settings
    """

    data: Path | None = None
    schema: Path | None = None
    out: Path = Path('runs/latest')
    seed: int = 0
    population: int = 20
    timesteps: int = 10
    epochs: int = 5
    batch: int = 128
    train_months: int = 6
    early_stop_patience: int = 0
    target_fpr: float = 0.05
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHAS
    budget: int = 10
    q_alpha: float = 0.1
    q_gamma: float = 0.9
    epsilon: float = 1.0
    fairness_weight: float = 0.0
    hyper: Path | None = None
    checkpoint: Path | None = None
    samples: tuple[int, ...] = ()

    def get_violations(self) -> list[str]:
        violations: list[str] = []

        for name in ('population', 'timesteps', 'batch', 'budget'):
            if getattr(self, name) <= 0:
                violations.append(f'{name} must be positive, got {getattr(self, name)}')
        for name in ('epochs', 'early_stop_patience'):
            if getattr(self, name) < 0:
                violations.append(f'{name} must be >= 0, got {getattr(self, name)}')
        if self.population % 2 != 0:
            violations.append(f'population must be even, got {self.population}')
        for name in ('target_fpr', 'q_alpha', 'q_gamma', 'epsilon'):
            if not 0.0 <= getattr(self, name) <= 1.0:
                violations.append(f'{name} must be in [0, 1], got {getattr(self, name)}')
        if not self.alpha_grid or not all(0.0 <= a <= 1.0 for a in self.alpha_grid):
            violations.append(f'alpha_grid must be non-empty values in [0, 1], got {self.alpha_grid}')
        if self.fairness_weight < 0.0:
            violations.append(f'fairness_weight must be >= 0, got {self.fairness_weight}')
        if any(index < 0 for index in self.samples):
            violations.append(f'samples must be row indices >= 0, got {self.samples}')

        return violations

    def validate(self) -> 'RunConfig':
        violations = self.get_violations()
        if violations:
            raise ConfigError('run config', violations)

        return self

    def merge(self, overrides: Mapping[str, Any]) -> 'RunConfig':
        """
        A copy with the given raw values applied; None values are ignored so
        unset command line flags keep the lower precedence value.
        """

        names = {field.name for field in fields(self)}
        unknown = sorted(str(key) for key in overrides if key not in names)
        if unknown:
            raise ConfigError('run config', [f'unknown key {key!r}' for key in unknown])

        changes: dict[str, Any] = {}
        problems: list[str] = []
        for key, value in overrides.items():
            if value is None:
                continue
            try:
                changes[key] = _coerce(key, value)
            except (TypeError, ValueError) as e:
                problems.append(f'{key}: {e}')

        if problems:
            raise ConfigError('run config', problems)

        return replace(self, **changes)

    def to_data(self) -> dict[str, Any]:
        data: dict[str, Any] = {}
        for field in fields(self):
            value = getattr(self, field.name)
            if isinstance(value, Path):
                value = str(value)
            elif isinstance(value, tuple):
                value = list(value)  # pyright: ignore[reportUnknownArgumentType]
            data[field.name] = value

        return data


def _coerce(key: str, value: Any) -> Any:
    if key in PATH_FIELDS:
        if not isinstance(value, (str, Path)):
            raise TypeError(f'expected a path, got {value!r}')
        return Path(value)
    if key in INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise TypeError(f'expected an integer, got {value!r}')
        return value
    if key in FLOAT_FIELDS:
        # YAML reads exponent notation without a dot (1e-3) as a string
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise TypeError(f'expected a number, got {value!r}')
        return float(value)
    if key == 'alpha_grid':
        return tuple(float(v) for v in _as_list(value))
    if key == 'samples':
        return tuple(int(v) for v in _as_list(value))

    raise AssertionError(f'Unhandled run config key {key}')  # pragma: no cover


def _as_list(value: Any) -> list[Any]:
    if isinstance(value, str):
        return [item for item in value.replace(',', ' ').split() if item]
    if isinstance(value, (list, tuple)):
        return list(value)  # pyright: ignore[reportUnknownArgumentType]

    raise TypeError(f'expected a list, got {value!r}')


def load_run_config_data(file_reader: FileReader, path: Path) -> dict[str, Any]:
    """Read a flat run config object (JSON or YAML)."""

    try:
        data = YamlDeserializer().get_data_from_file(file_reader, path)
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError('run config', [f'cannot read {path}: {e}']) from e

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError('run config', [f'{path} must contain a flat object of settings'])

    return data
