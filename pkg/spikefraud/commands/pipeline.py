# pyright: strict

"""
Steps shared by the commands: splitting and normalizing data, building the
model for a hyperparameter config, and rendering reports.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import pandas as pd

from spikefraud.config.checkpoint import to_stored_precision
from spikefraud.config.run_config import RunConfig
from spikefraud.data.dataset import Dataset, NormStats, holdout_last_month, normalize, temporal_split
from spikefraud.errors import InputError
from spikefraud.fairness.metrics import FairnessReport, fairness_report
from spikefraud.model import csnpc
from spikefraud.model.csnpc import ModelConfig, ModelParams
from spikefraud.search.space import HyperConfig
from spikefraud.system.file import ArtifactWriter
from spikefraud.errors import InputError
from spikefraud.training.metrics import EvalMetrics, confusion, roc_auc
from spikefraud.training.trainer import History, train, validation_threshold


logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Splits:
    """Normalized train, validation (last train month) and test splits."""

    train: Dataset
    validation: Dataset
    test: Dataset
    norm_stats: NormStats


def prepare_splits(dataset: Dataset, train_months: int) -> Splits:
    """
    Split by month, hold out the last training month for validation and
    normalize everything with statistics of the remaining train rows.
    """

    train_rows, test_rows = temporal_split(dataset, train_months)
    fit_rows, validation_rows = holdout_last_month(train_rows)
    train_set, validation_set, stats = normalize(fit_rows, validation_rows)
    logger.info(
        'Split %d rows into %d train, %d validation and %d test rows',
        len(dataset),
        len(train_set),
        len(validation_set),
        len(test_rows),
    )

    return Splits(
        train=train_set,
        validation=validation_set,
        test=stats.apply(test_rows),
        norm_stats=stats,
    )


@dataclass(frozen=True)
class TrainedModel:
    model_config: ModelConfig
    params: ModelParams
    history: History
    threshold: float
    validation: EvalMetrics


def fit(hyper: HyperConfig, run_config: RunConfig, splits: Splits) -> TrainedModel:
    """Build, train and calibrate a model on the validation split."""

    model_config = hyper.to_model_config(
        run_config.population,
        run_config.timesteps,
        splits.train.num_features,
    )
    train_config = hyper.to_train_config(
        epochs=run_config.epochs,
        batch_size=run_config.batch,
        early_stop_patience=run_config.early_stop_patience,
        rng_seed=run_config.seed,
        target_fpr=run_config.target_fpr,
    )

    params = csnpc.build(model_config, run_config.seed)
    params, history = train(params, model_config, splits.train, splits.validation, train_config)
    # checkpoints store float32, score exactly what they reload
    params = to_stored_precision(params)

    scores = csnpc.score(params, model_config, splits.validation.features)
    threshold = validation_threshold(scores, splits.validation.labels, run_config.target_fpr)

    return TrainedModel(
        model_config=model_config,
        params=params,
        history=history,
        threshold=threshold,
        validation=confusion(scores, splits.validation.labels, threshold),
    )


@dataclass(frozen=True)
class Assessment:
    """Metrics of a model on a split at a fixed threshold."""

    metrics: EvalMetrics
    fairness: FairnessReport
    roc_auc: float | None

    def to_report(self) -> dict[str, Any]:
        report = metrics_report(self.metrics, self.fairness)
        report['roc_auc'] = self.roc_auc

        return report


def assess(
    params: ModelParams,
    model_config: ModelConfig,
    dataset: Dataset,
    threshold: float,
    alphas: Sequence[float],
) -> Assessment:
    scores = csnpc.score(params, model_config, dataset.features)
    try:
        auc = roc_auc(scores, dataset.labels)
    except InputError as e:
        logger.warning('No ROC AUC: %s', e)
        auc = None

    return Assessment(
        metrics=confusion(scores, dataset.labels, threshold),
        fairness=fairness_report(scores, dataset.labels, dataset.sensitive, threshold, alphas),
        roc_auc=auc,
    )


def metrics_report(metrics: EvalMetrics, fairness: FairnessReport | None = None) -> dict[str, Any]:
    """Metric block with the column names of the benchmark tables."""

    report = metrics.to_data()
    if fairness is not None:
        report.update(fairness.to_data())

    return report


def write_rows(writer: ArtifactWriter, path: Path, rows: Sequence[Mapping[str, Any]]) -> None:
    pd.DataFrame(list(rows)).to_csv(writer.track(path), index=False, lineterminator='\n')