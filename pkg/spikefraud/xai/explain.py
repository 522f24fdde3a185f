# pyright: strict

"""
Post-hoc explanations of a trained network.

Saliency is the absolute gradient of the unweighted spike count cross
entropy with respect to the input features; spike activity is the number
of spikes of every output neuron over all timesteps.
"""

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
import numpy.typing as npt

from spikefraud.core import ops
from spikefraud.core.tensor import Array, Tape, Tensor, backward
from spikefraud.errors import DimensionError, InputError
from spikefraud.model import csnpc
from spikefraud.model.csnpc import ModelConfig, ModelParams


UNWEIGHTED = (1.0, 1.0)


@dataclass(frozen=True)
class Explanation:
    """
    Attributes:
        saliency: `[F]` absolute input gradients
        neuron_activity: `[P]` spike count of every output neuron
        class_activity: `[2]` neuron activity summed per class population
        predicted: decoded class
        target: class the saliency loss was taken against
        fraud_score: decoded fraud score
    """

    saliency: Array
    neuron_activity: Array
    class_activity: Array
    predicted: int
    target: int
    fraud_score: float

    def to_data(self) -> dict[str, Any]:
        return {
            'predicted': self.predicted,
            'target': self.target,
            'fraud_score': self.fraud_score,
            'saliency': [float(v) for v in self.saliency],
            'spike_activity': [float(v) for v in self.neuron_activity],
            'class_activity': [float(v) for v in self.class_activity],
        }


@dataclass(frozen=True)
class SpikeActivity:
    neurons: Array
    classes: Array


def _as_batch(features: npt.ArrayLike, config: ModelConfig) -> Array:
    batch = np.asarray(features, dtype=np.float64)
    if batch.ndim == 1:
        batch = batch[None, :]
    if batch.ndim == 3 and batch.shape[1] == 1:
        batch = batch[:, 0, :]
    if batch.ndim != 2 or batch.shape[1] != config.num_features:
        raise DimensionError('explain', 'features', config.num_features, batch.shape)

    return batch


def _explain_batch(
    params: ModelParams,
    config: ModelConfig,
    features: Array,
    targets: npt.NDArray[np.int64] | None,
) -> list[Explanation]:
    """
    One forward pass over the batch feeds saliency, activity and decoding.

    The batch loss is the sum of per-sample losses, so each sample's input
    gradient only depends on that sample.
    """

    tape = Tape()
    inputs = Tensor(features[:, None, :], requires_grad=True)
    record = csnpc.forward_tensors(params.as_tensors(), config, inputs, tape)

    out_spikes = record.out_spikes
    neuron_activity = out_spikes.sum(axis=-2)
    counts = csnpc.population_counts(out_spikes, config.population_size)
    predicted, scores = csnpc.decode_counts(counts)

    chosen = predicted if targets is None else targets
    size = features.shape[0]
    mean_loss = ops.weighted_ce(csnpc.spike_count_tensor(record, tape), chosen, UNWEIGHTED, tape)
    backward(tape, ops.scale(mean_loss, float(size), tape))

    grad = inputs.grad if inputs.grad is not None else np.zeros_like(inputs.data)
    saliency = np.abs(grad[:, 0, :])

    return [
        Explanation(
            saliency=saliency[i],
            neuron_activity=neuron_activity[i],
            class_activity=counts[i],
            predicted=int(predicted[i]),
            target=int(chosen[i]),
            fraud_score=float(scores[i]),
        )
        for i in range(size)
    ]


def _check_targets(targets: npt.ArrayLike, size: int) -> npt.NDArray[np.int64]:
    values = np.asarray(targets, dtype=np.int64).reshape(-1)
    if values.shape[0] != size:
        raise DimensionError('saliency', 'targets', size, values.shape[0])
    if np.any((values < 0) | (values > 1)):
        raise InputError(f'Targets must be 0 or 1, got {np.unique(values).tolist()}')

    return values


def explain_many(
    params: ModelParams,
    config: ModelConfig,
    features: npt.ArrayLike,
    targets: npt.ArrayLike | None = None,
    batch_size: int = 256,
) -> list[Explanation]:
    """
    Explanations of every row of `[N, F]` features; without targets each
    row is explained against its predicted class.
    """

    batch = _as_batch(features, config)
    checked = None if targets is None else _check_targets(targets, batch.shape[0])

    explanations: list[Explanation] = []
    for start in range(0, batch.shape[0], batch_size):
        stop = start + batch_size
        explanations.extend(
            _explain_batch(
                params,
                config,
                batch[start:stop],
                None if checked is None else checked[start:stop],
            ),
        )

    return explanations


def saliency(params: ModelParams, config: ModelConfig, x: npt.ArrayLike, y: int) -> Array:
    """`|dL/dx|` of one sample `[F]` (or `[1, F]`) against class `y`."""

    return explain(params, config, x, y).saliency


def spike_activity(params: ModelParams, config: ModelConfig, x: npt.ArrayLike) -> SpikeActivity:
    """Spike count per output neuron and per class population of one sample."""

    batch = _as_batch(x, config)
    if batch.shape[0] != 1:
        raise DimensionError('spike_activity', 'batch', 1, batch.shape[0])

    record = csnpc.forward(params, config, batch[:, None, :])
    neurons = record.out_spikes.sum(axis=-2)[0]
    classes = csnpc.population_counts(record.out_spikes, config.population_size)[0]

    return SpikeActivity(neurons=neurons, classes=classes)


def explain(
    params: ModelParams,
    config: ModelConfig,
    x: npt.ArrayLike,
    y: int | None = None,
) -> Explanation:
    batch = _as_batch(x, config)
    if batch.shape[0] != 1:
        raise DimensionError('explain', 'batch', 1, batch.shape[0])

    return explain_many(params, config, batch, None if y is None else [y])[0]


def aggregate_importance(
    params: ModelParams,
    config: ModelConfig,
    samples: Sequence[npt.ArrayLike] | Array,
    labels: npt.ArrayLike | None = None,
) -> Array:
    """
    Mean saliency per feature over the samples, normalized to sum to 1 (all
    zeros when every saliency is zero).
    """

    if len(samples) == 0:
        raise InputError('Cannot aggregate importance over an empty sample list')

    features = np.stack([np.asarray(sample, dtype=np.float64).reshape(-1) for sample in samples])
    return normalized_importance(explain_many(params, config, features, labels))


def normalized_importance(explanations: Sequence[Explanation]) -> Array:
    if not explanations:
        raise InputError('Cannot aggregate importance over no explanations')

    mean = np.mean([explanation.saliency for explanation in explanations], axis=0)
    total = float(mean.sum())
    if total == 0.0:
        return mean

    return mean / total
