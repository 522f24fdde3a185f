# pyright: strict

"""
Cortical spiking network with population coding.

Three convolution blocks (conv k=2 -> max pool -> LIF) with 32, 128 and 256
filters, a fully connected projection onto an output population of P LIF
neurons, unrolled over T timesteps with the same input injected as a
constant current at every step. Neurons `0 .. P/2 - 1` vote for class 0
(legitimate), `P/2 .. P - 1` for class 1 (fraud).
"""

from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Sequence

import numpy as np
import numpy.typing as npt

from spikefraud.core import ops
from spikefraud.core.ops import LifParams
from spikefraud.core.tensor import Array, Tape, Tensor
from spikefraud.errors import ConfigError, DimensionError


FILTERS = (32, 128, 256)
KERNEL_SIZE = 2
LAYER_COUNT = 4

PARAM_NAMES = (
    'conv1.weight', 'conv1.bias',
    'conv2.weight', 'conv2.bias',
    'conv3.weight', 'conv3.bias',
    'fc.weight', 'fc.bias',
)

MIN_FEATURES = 15


def block_lengths(num_features: int) -> tuple[int, ...]:
    """
    Sequence lengths after each conv and each pool of the three blocks,
    e.g. 30 -> (29, 14, 13, 6, 5, 2).
    """

    lengths: list[int] = []
    length = num_features
    for _ in FILTERS:
        length = length - KERNEL_SIZE + 1
        lengths.append(length)
        length = length // 2
        lengths.append(length)

    return tuple(lengths)


@dataclass(frozen=True)
class ModelConfig:
    """
    Architecture and neuron dynamics of one network.

    `decays`, `thresholds` hold one value per LIF layer (three conv blocks
    and the output population); `slope` is the surrogate slope shared by
    all layers.
    """

    population_size: int
    timesteps: int
    num_features: int
    decays: tuple[float, float, float, float]
    thresholds: tuple[float, float, float, float]
    slope: float
    relaxed_spikes: bool = False

    def get_violations(self) -> list[str]:
        violations: list[str] = []

        if self.population_size <= 0 or self.population_size % 2 != 0:
            violations.append(
                f'population_size must be even and positive, got {self.population_size}',
            )
        if self.timesteps <= 0:
            violations.append(f'timesteps must be positive, got {self.timesteps}')
        if self.num_features < MIN_FEATURES:
            violations.append(
                f'num_features must be >= {MIN_FEATURES} so three conv/pool blocks '
                + f'leave length >= 1, got {self.num_features}',
            )
        if len(self.decays) != LAYER_COUNT or not all(0.0 < d < 1.0 for d in self.decays):
            violations.append(f'decays must be {LAYER_COUNT} values in (0, 1), got {self.decays}')
        if len(self.thresholds) != LAYER_COUNT or not all(t > 0.0 for t in self.thresholds):
            violations.append(
                f'thresholds must be {LAYER_COUNT} positive values, got {self.thresholds}',
            )
        if not self.slope > 0.0:
            violations.append(f'slope must be positive, got {self.slope}')

        return violations

    def validate(self) -> None:
        violations = self.get_violations()
        if violations:
            raise ConfigError('model config', violations)

    def get_flat_features(self) -> int:
        """Width of the flattened last block, the input of the fc layer."""

        return FILTERS[-1] * block_lengths(self.num_features)[-1]

    def get_lif_params(self, layer: int) -> LifParams:
        return LifParams(
            beta=self.decays[layer],
            theta=self.thresholds[layer],
            sigma=self.slope,
            relaxed=self.relaxed_spikes,
        )

    def get_param_shapes(self) -> dict[str, tuple[int, ...]]:
        shapes: dict[str, tuple[int, ...]] = {}
        in_channels = 1
        for index, filters in enumerate(FILTERS, start=1):
            shapes[f'conv{index}.weight'] = (filters, in_channels, KERNEL_SIZE)
            shapes[f'conv{index}.bias'] = (filters,)
            in_channels = filters
        shapes['fc.weight'] = (self.population_size, self.get_flat_features())
        shapes['fc.bias'] = (self.population_size,)

        return shapes

    def to_data(self) -> dict[str, object]:
        return {
            'population_size': self.population_size,
            'timesteps': self.timesteps,
            'num_features': self.num_features,
            'decays': list(self.decays),
            'thresholds': list(self.thresholds),
            'slope': self.slope,
        }

    @classmethod
    def create_from_data(cls, data: Mapping[str, Any]) -> 'ModelConfig':
        d = [float(v) for v in data['decays']]
        t = [float(v) for v in data['thresholds']]
        if len(d) != LAYER_COUNT or len(t) != LAYER_COUNT:
            raise ConfigError('model config', [f'expected {LAYER_COUNT} decays and thresholds'])

        return cls(
            population_size=int(data['population_size']),
            timesteps=int(data['timesteps']),
            num_features=int(data['num_features']),
            decays=(d[0], d[1], d[2], d[3]),
            thresholds=(t[0], t[1], t[2], t[3]),
            slope=float(data['slope']),
        )


@dataclass
class ModelParams:
    """
    Named weights and biases in the fixed order of `PARAM_NAMES`.
    """

    arrays: dict[str, Array] = field(default_factory=lambda: {})

    def __iter__(self) -> Iterator[tuple[str, Array]]:
        for name in PARAM_NAMES:
            yield name, self.arrays[name]

    def __getitem__(self, name: str) -> Array:
        return self.arrays[name]

    def as_tensors(self, requires_grad: bool = False) -> dict[str, Tensor]:
        return {
            name: Tensor(array.copy() if requires_grad else array, requires_grad=requires_grad)
            for name, array in self
        }

    def copy(self) -> 'ModelParams':
        return ModelParams({name: array.copy() for name, array in self})


@dataclass
class ForwardRecord:
    """
    Per-step tensors of one forward pass.

    `spikes[layer][t]` and `membranes[layer][t]` for the four LIF layers
    (the last one is the output population), `currents[t]` is the input
    current of the output population.
    """

    currents: list[Tensor]
    spikes: list[list[Tensor]]
    membranes: list[list[Tensor]]

    @property
    def timesteps(self) -> int:
        return len(self.currents)

    @property
    def out_spike_steps(self) -> list[Tensor]:
        return self.spikes[-1]

    @property
    def out_spikes(self) -> Array:
        """Output spikes stacked on the time axis: `[T, P]` or `[B, T, P]`."""

        return np.stack([step.data for step in self.out_spike_steps], axis=-2)


@dataclass(frozen=True)
class Decoded:
    predicted: int
    counts: tuple[float, float]
    fraud_score: float


def build(config: ModelConfig, rng_seed: int) -> ModelParams:
    """
    Initialise weights with a seeded He-style uniform fan-in scaling,
    `U(-sqrt(6 / fan_in), sqrt(6 / fan_in))`, and zero biases.
    """

    config.validate()
    rng = np.random.default_rng(rng_seed)

    arrays: dict[str, Array] = {}
    for name, shape in config.get_param_shapes().items():
        if name.endswith('.bias'):
            arrays[name] = np.zeros(shape, dtype=np.float64)
            continue

        fan_in = int(np.prod(shape[1:]))
        bound = float(np.sqrt(6.0 / fan_in))
        arrays[name] = rng.uniform(-bound, bound, size=shape)

    return ModelParams(arrays)


def count_params(params: ModelParams) -> int:
    return sum(int(array.size) for _, array in params)


def forward_tensors(
    tensors: Mapping[str, Tensor],
    config: ModelConfig,
    x: Tensor,
    tape: Tape | None = None,
) -> ForwardRecord:
    """
    Run the network on tensors that may require gradients.

    `x` is one sample `[1, F]` or a batch `[B, 1, F]`.
    """

    if x.data.ndim not in (2, 3) or x.shape[-2:] != (1, config.num_features):
        raise DimensionError('forward', 'input', (1, config.num_features), x.shape)

    lif = [config.get_lif_params(layer) for layer in range(LAYER_COUNT)]
    batch_shape = x.shape[:-2]

    def block(index: int, inputs: Tensor) -> Tensor:
        convolved = ops.conv1d(
            inputs,
            tensors[f'conv{index}.weight'],
            tensors[f'conv{index}.bias'],
            tape,
        )
        return ops.maxpool1d(convolved, tape)

    # the input is the same every step, so its first block drive is too
    drive = block(1, x)

    spikes: list[list[Tensor]] = [[] for _ in range(LAYER_COUNT)]
    membranes: list[list[Tensor]] = [[] for _ in range(LAYER_COUNT)]
    currents: list[Tensor] = []

    def step(layer: int, current: Tensor) -> Tensor:
        if spikes[layer]:
            s_prev, u_prev = spikes[layer][-1], membranes[layer][-1]
        else:
            s_prev = u_prev = Tensor(np.zeros(current.shape))

        s, u = ops.lif_step(current, u_prev, s_prev, lif[layer], tape)
        spikes[layer].append(s)
        membranes[layer].append(u)
        return s

    for _ in range(config.timesteps):
        s1 = step(0, drive)
        s2 = step(1, block(2, s1))
        s3 = step(2, block(3, s2))

        flat = ops.reshape(s3, batch_shape + (config.get_flat_features(),), tape)
        current = ops.linear(flat, tensors['fc.weight'], tensors['fc.bias'], tape)
        currents.append(current)
        step(3, current)

    return ForwardRecord(currents=currents, spikes=spikes, membranes=membranes)


def forward(
    params: ModelParams,
    config: ModelConfig,
    x: npt.ArrayLike,
) -> ForwardRecord:
    """Inference forward pass; nothing is recorded for differentiation."""

    return forward_tensors(params.as_tensors(), config, Tensor(x))


def population_counts(out_spikes: Array, population_size: int) -> Array:
    """Per-class spike counts `[..., 2]` of stacked output spikes `[..., T, P]`."""

    if out_spikes.shape[-1] != population_size:
        raise DimensionError('decode', 'P', population_size, out_spikes.shape[-1])
    if population_size % 2 != 0:
        raise DimensionError('decode', 'P', 'even', population_size)

    half = population_size // 2
    totals = out_spikes.sum(axis=-2)
    return np.stack([totals[..., :half].sum(axis=-1), totals[..., half:].sum(axis=-1)], axis=-1)


def decode_counts(counts: Array) -> tuple[npt.NDArray[np.int64], Array]:
    """
    Vectorised population decoding of `[N, 2]` counts.

    Returns:
        (predicted classes, Laplace smoothed fraud scores `(n1 + 1) / (n0 + n1 + 2)`)
    """

    predicted = (counts[..., 1] > counts[..., 0]).astype(np.int64)
    scores = (counts[..., 1] + 1.0) / (counts[..., 0] + counts[..., 1] + 2.0)
    return predicted, scores


def decode(record: ForwardRecord, population_size: int) -> Decoded:
    """
    Decode a single-sample record: the class with more output spikes wins,
    ties go to class 0.
    """

    out_spikes = record.out_spikes
    if out_spikes.ndim != 2:
        raise DimensionError('decode', 'batch', 'single sample [T, P]', out_spikes.shape)

    counts = population_counts(out_spikes, population_size)
    predicted, scores = decode_counts(counts)
    return Decoded(
        predicted=int(predicted),
        counts=(float(counts[0]), float(counts[1])),
        fraud_score=float(scores),
    )


def spike_count_tensor(record: ForwardRecord, tape: Tape | None = None) -> Tensor:
    """Differentiable per-class spike counts summed over every step."""

    steps = record.out_spike_steps
    total = steps[0]
    for spikes in steps[1:]:
        total = ops.add(total, spikes, tape)

    return ops.population_sum(total, tape)


def loss(
    record: ForwardRecord,
    label: int | npt.NDArray[np.int64],
    class_weights: Sequence[float] | Array,
    tape: Tape | None = None,
) -> Tensor:
    """
    Weighted spike count cross entropy; differentiable through every step.
    """

    return ops.weighted_ce(spike_count_tensor(record, tape), label, class_weights, tape)


def score(
    params: ModelParams,
    config: ModelConfig,
    features: Array,
    batch_size: int = 256,
) -> Array:
    """Fraud score of every row of an `[N, F]` feature matrix."""

    tensors = params.as_tensors()
    scores: list[Array] = []

    for start in range(0, features.shape[0], batch_size):
        batch = features[start:start + batch_size, None, :]
        record = forward_tensors(tensors, config, Tensor(batch))
        _, batch_scores = decode_counts(population_counts(record.out_spikes, config.population_size))
        scores.append(batch_scores)

    if not scores:
        return np.zeros(0, dtype=np.float64)

    return np.concatenate(scores)
