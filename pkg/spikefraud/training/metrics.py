# pyright: strict

import logging
from dataclasses import dataclass
from typing import Any

import numpy as np
import numpy.typing as npt
from sklearn.metrics import roc_auc_score

from spikefraud.errors import CalibrationError, InputError


logger = logging.getLogger(__name__)

NO_POSITIVES = 'no_positives'
NO_NEGATIVES = 'no_negatives'


@dataclass(frozen=True)
class EvalMetrics:
    """
    Confusion counts and the rates derived from them.

    Notes:
    - A rate whose denominator is zero is reported as 0 and the missing
      class is listed in `degenerate`
    - `tpr` is the recall
    """

    tp: int
    fp: int
    tn: int
    fn: int
    fpr: float
    tpr: float
    tnr: float
    fnr: float
    accuracy: float
    degenerate: tuple[str, ...] = ()

    @classmethod
    def create_from_counts(cls, tp: int, fp: int, tn: int, fn: int) -> 'EvalMetrics':
        negatives = fp + tn
        positives = tp + fn
        total = negatives + positives

        degenerate: list[str] = []
        if positives == 0:
            degenerate.append(NO_POSITIVES)
        if negatives == 0:
            degenerate.append(NO_NEGATIVES)

        fpr = fp / negatives if negatives > 0 else 0.0
        tpr = tp / positives if positives > 0 else 0.0

        return cls(
            tp=tp,
            fp=fp,
            tn=tn,
            fn=fn,
            fpr=fpr,
            tpr=tpr,
            tnr=1.0 - fpr if negatives > 0 else 0.0,
            fnr=1.0 - tpr if positives > 0 else 0.0,
            accuracy=(tp + tn) / total if total > 0 else 0.0,
            degenerate=tuple(degenerate),
        )

    @property
    def recall(self) -> float:
        return self.tpr

    def to_data(self) -> dict[str, Any]:
        return {
            'fpr': self.fpr,
            'recall': self.tpr,
            'tnr': self.tnr,
            'fnr': self.fnr,
            'accuracy': self.accuracy,
            'tp': self.tp,
            'fp': self.fp,
            'tn': self.tn,
            'fn': self.fn,
            'degenerate': list(self.degenerate),
        }

    @classmethod
    def create_from_data(cls, data: dict[str, Any]) -> 'EvalMetrics':
        return cls.create_from_counts(
            tp=int(data['tp']),
            fp=int(data['fp']),
            tn=int(data['tn']),
            fn=int(data['fn']),
        )


@dataclass(frozen=True)
class ClassWeights:
    """
    Loss weights for class 0 and class 1 and the classes absent from the
    labels they were computed from.
    """

    weights: tuple[float, float]
    missing_classes: tuple[int, ...] = ()


def _as_labels(labels: npt.ArrayLike) -> npt.NDArray[np.int64]:
    return np.asarray(labels, dtype=np.int64).reshape(-1)


def class_weights(labels: npt.ArrayLike) -> ClassWeights:
    """
    Inverse frequency weights `total / (2 count_c)`, which average 1 over
    the samples. A class absent from the labels gets weight 1.
    """

    values = _as_labels(labels)
    if values.size == 0:
        raise InputError('Cannot compute class weights of an empty label array')

    total = values.size
    weights: list[float] = []
    missing: list[int] = []
    for label in (0, 1):
        count = int(np.count_nonzero(values == label))
        if count == 0:
            missing.append(label)
            weights.append(1.0)
        else:
            weights.append(total / (2.0 * count))

    if missing:
        logger.warning('Class(es) %s absent from the labels, using weight 1', missing)

    return ClassWeights((weights[0], weights[1]), tuple(missing))


def confusion(
    scores: npt.ArrayLike,
    labels: npt.ArrayLike,
    threshold: float,
) -> EvalMetrics:
    """
    Confusion metrics of the rule `positive iff score >= threshold`.
    """

    score_values = np.asarray(scores, dtype=np.float64).reshape(-1)
    label_values = _as_labels(labels)
    if score_values.shape != label_values.shape:
        raise InputError(
            f'scores and labels differ in length: {score_values.size} != {label_values.size}',
        )

    predicted = score_values >= threshold
    actual = label_values == 1

    return EvalMetrics.create_from_counts(
        tp=int(np.count_nonzero(predicted & actual)),
        fp=int(np.count_nonzero(predicted & ~actual)),
        tn=int(np.count_nonzero(~predicted & ~actual)),
        fn=int(np.count_nonzero(~predicted & actual)),
    )


def calibrate_threshold(
    scores: npt.ArrayLike,
    labels: npt.ArrayLike,
    target_fpr: float,
) -> float:
    """
    Smallest threshold whose false positive rate does not exceed
    `target_fpr`.

    Candidates are the observed scores of negative instances plus +inf, so
    the result admits the largest achievable FPR that stays within the
    target. Calibrate on a validation split, never on the test split.
    """

    if not 0.0 <= target_fpr <= 1.0:
        raise InputError(f'target_fpr must be in [0, 1], got {target_fpr}')

    score_values = np.asarray(scores, dtype=np.float64).reshape(-1)
    label_values = _as_labels(labels)
    if score_values.shape != label_values.shape:
        raise InputError(
            f'scores and labels differ in length: {score_values.size} != {label_values.size}',
        )

    negative_scores = np.sort(score_values[label_values == 0])
    if negative_scores.size == 0:
        raise CalibrationError('Cannot calibrate a threshold without negative instances')

    candidates = np.unique(negative_scores)
    # negatives at or above each candidate
    flagged = negative_scores.size - np.searchsorted(negative_scores, candidates, side='left')
    achieved = flagged / negative_scores.size

    admissible = np.flatnonzero(achieved <= target_fpr)
    if admissible.size == 0:
        return float('inf')

    return float(candidates[admissible[0]])


def roc_auc(scores: npt.ArrayLike, labels: npt.ArrayLike) -> float:
    """Area under the ROC curve; tied scores count half."""

    score_values = np.asarray(scores, dtype=np.float64).reshape(-1)
    label_values = _as_labels(labels)
    if score_values.shape != label_values.shape:
        raise InputError(
            f'scores and labels differ in length: {score_values.size} != {label_values.size}',
        )
    positives = int(np.count_nonzero(label_values == 1))
    negatives = label_values.size - positives
    if positives == 0 or negatives == 0:
        raise InputError('AUC needs both positive and negative instances')

    return float(roc_auc_score(label_values, score_values))
