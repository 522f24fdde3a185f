# pyright: strict

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import numpy.typing as npt

from spikefraud.core.optim import AdamState, adam_step
from spikefraud.core.tensor import Array, Tape, Tensor, backward
from spikefraud.data.dataset import Dataset
from spikefraud.errors import CalibrationError, ConfigError, DimensionError, InputError, TrainingError
from spikefraud.model import csnpc
from spikefraud.model.csnpc import ModelConfig, ModelParams
from spikefraud.training.metrics import (
    EvalMetrics,
    calibrate_threshold,
    class_weights,
    confusion,
)


logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class TrainConfig:
    """
    Settings of the training loop.

    Notes:
    - `weight` is the multiplicative Adam weight retention (1.0 disables it)
    - `early_stop_patience` 0 disables early stopping
    - `target_fpr` is the false positive rate validation thresholds are
      calibrated at
    """

    epochs: int
    batch_size: int = 128
    lr: float = 1e-3
    adam_beta1: float = 0.98
    adam_beta2: float = 0.99
    weight: float = 1.0
    early_stop_patience: int = 0
    rng_seed: int = 0
    target_fpr: float = 0.05

    def get_violations(self) -> list[str]:
        violations: list[str] = []
        if self.epochs < 0:
            violations.append(f'epochs must be >= 0, got {self.epochs}')
        if self.batch_size <= 0:
            violations.append(f'batch_size must be positive, got {self.batch_size}')
        if not self.lr > 0.0:
            violations.append(f'lr must be positive, got {self.lr}')
        if not (0.0 < self.adam_beta1 < 1.0 and 0.0 < self.adam_beta2 < 1.0):
            violations.append(
                f'Adam betas must be in (0, 1), got {self.adam_beta1}, {self.adam_beta2}',
            )
        if not 0.0 < self.weight <= 1.0:
            violations.append(f'weight must be in (0, 1], got {self.weight}')
        if self.early_stop_patience < 0:
            violations.append(
                f'early_stop_patience must be >= 0, got {self.early_stop_patience}',
            )
        if not 0.0 <= self.target_fpr <= 1.0:
            violations.append(f'target_fpr must be in [0, 1], got {self.target_fpr}')

        return violations

    def validate(self) -> None:
        violations = self.get_violations()
        if violations:
            raise ConfigError('training config', violations)


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_threshold: float
    val_metrics: EvalMetrics

    def to_row(self) -> dict[str, Any]:
        return {
            'epoch': self.epoch,
            'train_loss': self.train_loss,
            'val_threshold': self.val_threshold,
            **{
                f'val_{key}': value
                for key, value in self.val_metrics.to_data().items()
                if key != 'degenerate'
            },
        }


@dataclass
class History:
    """
    Per-epoch training loss and validation metrics.

    `best_epoch` is the epoch whose parameters `train` returned (None when
    no epoch ran).
    """

    records: list[EpochRecord] = field(default_factory=lambda: [])
    best_epoch: int | None = None
    stopped_early: bool = False

    def __len__(self) -> int:
        return len(self.records)

    def get_best_record(self) -> EpochRecord | None:
        for record in self.records:
            if record.epoch == self.best_epoch:
                return record

        return None

    def to_rows(self) -> list[dict[str, Any]]:
        return [record.to_row() for record in self.records]


def _check_dataset(name: str, dataset: Dataset, config: ModelConfig) -> None:
    if len(dataset) == 0:
        raise InputError(f'The {name} split is empty')
    if dataset.num_features != config.num_features:
        raise DimensionError('train', f'{name} features', config.num_features, dataset.num_features)


def validation_threshold(scores: Array, labels: npt.ArrayLike, target_fpr: float) -> float:
    """
    Calibrated threshold on validation scores, or 0.5 when the validation
    split has no negatives to calibrate on.
    """

    try:
        return calibrate_threshold(scores, labels, target_fpr)
    except CalibrationError as e:
        logger.warning('%s, using threshold %s', e, DEFAULT_THRESHOLD)
        return DEFAULT_THRESHOLD


def train(
    params: ModelParams,
    model_config: ModelConfig,
    train_set: Dataset,
    val_set: Dataset,
    tc: TrainConfig,
) -> tuple[ModelParams, History]:
    """
    Mini-batch surrogate-gradient training with Adam.

    Notes:
    - Rows are shuffled every epoch from a generator seeded with
      `tc.rng_seed`, so equal inputs give equal histories
    - The loss of each batch is its class-weighted mean; the epoch loss is
      the row-weighted mean over batches
    - After each epoch the validation split is scored, a threshold is
      calibrated at `tc.target_fpr` and its recall drives early stopping
    - With early stopping the parameters of the best validation epoch are
      returned, otherwise those of the last epoch
    """

    tc.validate()
    model_config.validate()
    _check_dataset('train', train_set, model_config)
    _check_dataset('validation', val_set, model_config)

    history = History()
    if tc.epochs == 0:
        return params, history

    weights = class_weights(train_set.labels).weights
    rng = np.random.default_rng(tc.rng_seed)
    state = AdamState()
    current = params.copy()

    best_params = current
    best_recall = -math.inf
    epochs_without_improvement = 0

    for epoch in range(tc.epochs):
        order = rng.permutation(len(train_set))
        loss_sum = 0.0

        for start in range(0, order.size, tc.batch_size):
            rows = order[start:start + tc.batch_size]

            tape = Tape()
            tensors = current.as_tensors(requires_grad=True)
            inputs = Tensor(train_set.features[rows, None, :])
            record = csnpc.forward_tensors(tensors, model_config, inputs, tape)
            batch_loss = csnpc.loss(record, train_set.labels[rows], weights, tape)

            value = batch_loss.item()
            if not math.isfinite(value):
                raise TrainingError(epoch, value)

            backward(tape, batch_loss)
            grads = {
                name: tensor.grad
                for name, tensor in tensors.items()
                if tensor.grad is not None
            }

            arrays, state = adam_step(
                current.arrays,
                grads,
                state,
                lr=tc.lr,
                beta1=tc.adam_beta1,
                beta2=tc.adam_beta2,
                weight=tc.weight,
            )
            current = ModelParams(arrays)
            loss_sum += value * rows.size

        train_loss = loss_sum / order.size

        val_scores = csnpc.score(current, model_config, val_set.features)
        val_threshold = validation_threshold(val_scores, val_set.labels, tc.target_fpr)
        val_metrics = confusion(val_scores, val_set.labels, val_threshold)
        history.records.append(EpochRecord(epoch, train_loss, val_threshold, val_metrics))

        logger.info(
            'Epoch %d: train loss %.6f, validation recall %.4f at FPR %.4f (threshold %s)',
            epoch,
            train_loss,
            val_metrics.recall,
            val_metrics.fpr,
            val_threshold,
        )

        if val_metrics.recall > best_recall:
            best_recall = val_metrics.recall
            best_params = current
            history.best_epoch = epoch
            epochs_without_improvement = 0
        else:
            epochs_without_improvement += 1

        if tc.early_stop_patience > 0 and epochs_without_improvement >= tc.early_stop_patience:
            logger.info(
                'Stopping early after epoch %d, best epoch %s',
                epoch,
                history.best_epoch,
            )
            history.stopped_early = True
            break

    if tc.early_stop_patience > 0:
        return best_params, history

    history.best_epoch = tc.epochs - 1
    return current, history


def evaluate(
    params: ModelParams,
    model_config: ModelConfig,
    dataset: Dataset,
    threshold: float = DEFAULT_THRESHOLD,
) -> EvalMetrics:
    """Score every row and compare against the labels at `threshold`."""

    scores = csnpc.score(params, model_config, dataset.features)
    return confusion(scores, dataset.labels, threshold)
