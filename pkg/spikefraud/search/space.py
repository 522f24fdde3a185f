# pyright: strict

"""
The hyperparameter search space: one point is a `HyperConfig`, and
`SearchSpace` knows each field's range, sampling scale and the low-level
heuristic group that perturbs it.
"""

import math
from dataclasses import dataclass, fields, replace
from typing import Any, Mapping

import numpy as np

from spikefraud.errors import ConfigError, InputError
from spikefraud.model.csnpc import ModelConfig
from spikefraud.training.trainer import TrainConfig


@dataclass(frozen=True)
class HyperConfig:
    """
    Neuron dynamics and optimizer settings searched by the optimizer.

    Attributes:
        beta1..beta4: membrane decay of the three conv blocks and the output
        sigma: surrogate spike slope
        theta1..theta4: firing thresholds, same layer order as the decays
        omega: multiplicative Adam weight retention
        adam_beta1, adam_beta2: Adam moment decays
        lr: learning rate
    """

    beta1: float
    beta2: float
    beta3: float
    beta4: float
    sigma: float
    theta1: float
    theta2: float
    theta3: float
    theta4: float
    omega: float
    adam_beta1: float
    adam_beta2: float
    lr: float

    @property
    def decays(self) -> tuple[float, float, float, float]:
        return (self.beta1, self.beta2, self.beta3, self.beta4)

    @property
    def thresholds(self) -> tuple[float, float, float, float]:
        return (self.theta1, self.theta2, self.theta3, self.theta4)

    def get(self, name: str) -> float:
        return float(getattr(self, name))

    def get_violations(self, space: 'SearchSpace | None' = None) -> list[str]:
        space = space or DEFAULT_SPACE

        return [
            f'{bounds.name} must be in [{bounds.low}, {bounds.high}], got {self.get(bounds.name)}'
            for bounds in space.fields
            if not bounds.low <= self.get(bounds.name) <= bounds.high
        ]

    def validate(self, space: 'SearchSpace | None' = None) -> None:
        violations = self.get_violations(space)
        if violations:
            raise ConfigError('hyperparameter config', violations)

    def to_model_config(
        self,
        population_size: int,
        timesteps: int,
        num_features: int,
        relaxed_spikes: bool = False,
    ) -> ModelConfig:
        return ModelConfig(
            population_size=population_size,
            timesteps=timesteps,
            num_features=num_features,
            decays=self.decays,
            thresholds=self.thresholds,
            slope=self.sigma,
            relaxed_spikes=relaxed_spikes,
        )

    def to_train_config(
        self,
        epochs: int,
        batch_size: int,
        early_stop_patience: int,
        rng_seed: int,
        target_fpr: float,
    ) -> TrainConfig:
        return TrainConfig(
            epochs=epochs,
            batch_size=batch_size,
            lr=self.lr,
            adam_beta1=self.adam_beta1,
            adam_beta2=self.adam_beta2,
            weight=self.omega,
            early_stop_patience=early_stop_patience,
            rng_seed=rng_seed,
            target_fpr=target_fpr,
        )

    def to_data(self) -> dict[str, float]:
        return {field.name: self.get(field.name) for field in fields(self)}

    @classmethod
    def create_from_data(cls, data: object) -> 'HyperConfig':
        if not isinstance(data, Mapping):
            raise ConfigError('hyperparameter config', ['expected a mapping of field values'])
        values: Mapping[str, Any] = data  # pyright: ignore[reportUnknownVariableType]

        names = [field.name for field in fields(cls)]
        missing = [name for name in names if name not in values]
        unknown = [str(key) for key in values if key not in names]
        if missing or unknown:
            raise ConfigError(
                'hyperparameter config',
                [f'missing field {name!r}' for name in missing]
                + [f'unknown field {name!r}' for name in unknown],
            )

        try:
            return cls(**{name: float(values[name]) for name in names})
        except (TypeError, ValueError) as e:
            raise ConfigError('hyperparameter config', [str(e)]) from e


@dataclass(frozen=True)
class FieldRange:
    """
    Range of one HyperConfig field.

    `log` fields are sampled log-uniformly and jittered multiplicatively,
    the others uniformly and additively. `group` is the low-level heuristic
    (1..6) that perturbs the field.
    """

    name: str
    low: float
    high: float
    log: bool
    group: int

    def clamp(self, value: float) -> float:
        return min(max(value, self.low), self.high)

    def sample(self, rng: np.random.Generator) -> float:
        if self.log:
            value = math.exp(rng.uniform(math.log(self.low), math.log(self.high)))
        else:
            value = rng.uniform(self.low, self.high)

        return self.clamp(value)

    def jitter(self, value: float, scale: float, rng: np.random.Generator) -> float:
        """
        Perturb `value` by Gaussian noise of width `scale` in the field's own
        scale, then clamp.

        Log fields are multiplied by `exp(N(0, scale))`. Linear fields (the
        Adam betas) move by `N(0, scale)` range widths.
        """

        if self.log:
            value = value * math.exp(rng.normal(0.0, scale))
        else:
            value = value + rng.normal(0.0, scale * (self.high - self.low))

        return self.clamp(value)


@dataclass(frozen=True)
class SearchSpace:
    fields: tuple[FieldRange, ...]

    def get_field(self, name: str) -> FieldRange:
        for bounds in self.fields:
            if bounds.name == name:
                return bounds

        raise InputError(f'Unknown hyperparameter {name!r}')

    def get_group(self, group: int) -> tuple[FieldRange, ...]:
        return tuple(bounds for bounds in self.fields if bounds.group == group)

    def sample(self, rng: np.random.Generator) -> HyperConfig:
        return HyperConfig(**{bounds.name: bounds.sample(rng) for bounds in self.fields})

    def jitter(
        self,
        config: HyperConfig,
        targets: tuple[FieldRange, ...],
        scale: float,
        rng: np.random.Generator,
    ) -> HyperConfig:
        return replace(
            config,
            **{bounds.name: bounds.jitter(config.get(bounds.name), scale, rng) for bounds in targets},
        )

    def clamp(self, config: HyperConfig) -> HyperConfig:
        return replace(
            config,
            **{bounds.name: bounds.clamp(config.get(bounds.name)) for bounds in self.fields},
        )


DECAYS = 1
THRESHOLDS = 2
SLOPE = 3
LEARNING_RATE = 4
ADAM_BETAS = 5
ADAM_WEIGHT = 6

DEFAULT_SPACE = SearchSpace(
    fields=(
        *(FieldRange(f'beta{i}', 0.1, 0.95, log=True, group=DECAYS) for i in range(1, 5)),
        FieldRange('sigma', 10.0, 50.0, log=True, group=SLOPE),
        *(FieldRange(f'theta{i}', 0.1, 1.0, log=True, group=THRESHOLDS) for i in range(1, 5)),
        FieldRange('omega', 0.95, 1.0, log=True, group=ADAM_WEIGHT),
        FieldRange('adam_beta1', 0.97, 0.99, log=False, group=ADAM_BETAS),
        FieldRange('adam_beta2', 0.97, 0.99, log=False, group=ADAM_BETAS),
        FieldRange('lr', 1e-6, 1e-3, log=True, group=LEARNING_RATE),
    ),
)

# used when training without a searched config
DEFAULT_HYPER_CONFIG = HyperConfig(
    beta1=0.5,
    beta2=0.5,
    beta3=0.5,
    beta4=0.5,
    sigma=10.0,
    theta1=0.5,
    theta2=0.5,
    theta3=0.5,
    theta4=0.5,
    omega=1.0,
    adam_beta1=0.98,
    adam_beta2=0.99,
    lr=1e-3,
)
