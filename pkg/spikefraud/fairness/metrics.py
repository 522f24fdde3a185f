# pyright: strict

"""
Group fairness of a thresholded fraud detector.

Each sensitive attribute splits the rows into a high group (value >= cut)
and a low group. Predictive equality compares the false positive rates of
the two groups as a ratio in [0, 1].
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Sequence

import numpy as np
import numpy.typing as npt

from spikefraud.errors import InputError
from spikefraud.training.metrics import NO_NEGATIVES, EvalMetrics, confusion


logger = logging.getLogger(__name__)

DEFAULT_ALPHAS = (0.0, 0.25, 0.5, 0.75, 1.0)

EMPTY_GROUP = 'empty_group'


@dataclass(frozen=True)
class GroupSpec:
    attribute: str
    cut: float
    high_label: str
    low_label: str


DEFAULT_GROUP_SPECS: dict[str, GroupSpec] = {
    'age': GroupSpec('age', 50.0, 'older', 'younger'),
    'income': GroupSpec('income', 0.5, 'rich', 'poor'),
    'employment': GroupSpec('employment', 3.0, 'unstable', 'stable'),
}


@dataclass(frozen=True)
class Partition:
    mask_high: npt.NDArray[np.bool_]
    mask_low: npt.NDArray[np.bool_]

    def __iter__(self) -> Iterator[npt.NDArray[np.bool_]]:
        yield self.mask_high
        yield self.mask_low

    @property
    def degenerate(self) -> bool:
        """One of the groups is empty."""

        return not self.mask_high.any() or not self.mask_low.any()


def partition(attr_values: npt.ArrayLike, spec: GroupSpec) -> Partition:
    values = np.asarray(attr_values, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise InputError(f'Cannot partition an empty {spec.attribute} array')

    mask_high = values >= spec.cut
    result = Partition(mask_high=mask_high, mask_low=~mask_high)
    if result.degenerate:
        logger.warning('Every %s value falls on one side of the cut %s', spec.attribute, spec.cut)

    return result


def predictive_equality(fpr_a: float, fpr_b: float) -> float:
    """
    `min / max` of two false positive rates; two zero rates are at parity
    (1.0), a single zero rate is maximal disparity (0.0).
    """

    high = max(fpr_a, fpr_b)
    if high == 0.0:
        return 1.0

    return min(fpr_a, fpr_b) / high


def tradeoff(tpr_at_target_fpr: float, pe: float, alpha: float) -> float:
    """`alpha * tpr + (1 - alpha) * pe`: alpha 1 is pure recall, 0 pure fairness."""

    if not 0.0 <= alpha <= 1.0:
        raise InputError(f'alpha must be in [0, 1], got {alpha}')

    return alpha * tpr_at_target_fpr + (1.0 - alpha) * pe


@dataclass(frozen=True)
class AttributeFairness:
    spec: GroupSpec
    high: EvalMetrics
    low: EvalMetrics
    pe: float
    tradeoffs: dict[float, float]
    degenerate: tuple[str, ...] = ()

    def to_data(self) -> dict[str, Any]:
        return {
            'groups': {
                self.spec.high_label: self.high.to_data(),
                self.spec.low_label: self.low.to_data(),
            },
            'fpr': {
                self.spec.high_label: self.high.fpr,
                self.spec.low_label: self.low.fpr,
            },
            'pe': self.pe,
            'tradeoffs': {str(alpha): value for alpha, value in self.tradeoffs.items()},
            'degenerate': list(self.degenerate),
        }


@dataclass(frozen=True)
class FairnessReport:
    """
    Predictive equality per attribute, computed at one decision threshold,
    with the performance/fairness trade-off for each alpha.
    """

    threshold: float
    recall: float
    attributes: dict[str, AttributeFairness] = field(default_factory=lambda: {})

    def min_pe(self) -> float:
        """Worst predictive equality over the attributes (1.0 when none)."""

        return min((a.pe for a in self.attributes.values()), default=1.0)

    def to_data(self) -> dict[str, Any]:
        data: dict[str, Any] = {}
        for attribute, fairness in self.attributes.items():
            data[f'pe_{attribute}'] = fairness.pe
        data['tradeoffs'] = {
            attribute: {str(alpha): value for alpha, value in fairness.tradeoffs.items()}
            for attribute, fairness in self.attributes.items()
        }
        data['groups'] = {
            attribute: fairness.to_data()
            for attribute, fairness in self.attributes.items()
        }

        return data


def fairness_report(
    scores: npt.ArrayLike,
    labels: npt.ArrayLike,
    attrs: Mapping[str, npt.ArrayLike],
    threshold: float,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    specs: Mapping[str, GroupSpec] = DEFAULT_GROUP_SPECS,
) -> FairnessReport:
    """
    Per-group confusion metrics, predictive equality and trade-offs.

    Notes:
    - A group that is empty or has no negatives is flagged in `degenerate`;
      its FPR is reported as 0 so PE follows the zero-FPR conventions
    - Trade-offs use the recall of the whole data at the same threshold
    """

    for alpha in alphas:
        if not 0.0 <= alpha <= 1.0:
            raise InputError(f'alpha must be in [0, 1], got {alpha}')

    score_values = np.asarray(scores, dtype=np.float64).reshape(-1)
    label_values = np.asarray(labels, dtype=np.int64).reshape(-1)
    overall = confusion(score_values, label_values, threshold)

    attributes: dict[str, AttributeFairness] = {}
    for attribute, values in attrs.items():
        if attribute not in specs:
            raise InputError(f'No group spec for attribute {attribute!r}')
        spec = specs[attribute]

        value_array = np.asarray(values, dtype=np.float64).reshape(-1)
        if value_array.shape != score_values.shape:
            raise InputError(
                f'{attribute} values differ in length from the scores: '
                + f'{value_array.size} != {score_values.size}',
            )

        groups = partition(value_array, spec)
        high = confusion(score_values[groups.mask_high], label_values[groups.mask_high], threshold)
        low = confusion(score_values[groups.mask_low], label_values[groups.mask_low], threshold)

        degenerate: list[str] = []
        if groups.degenerate:
            degenerate.append(EMPTY_GROUP)
        for label, metrics in ((spec.high_label, high), (spec.low_label, low)):
            if NO_NEGATIVES in metrics.degenerate:
                degenerate.append(f'{label}:{NO_NEGATIVES}')
        if degenerate:
            logger.warning('Degenerate %s groups: %s', attribute, degenerate)

        pe = predictive_equality(high.fpr, low.fpr)
        attributes[attribute] = AttributeFairness(
            spec=spec,
            high=high,
            low=low,
            pe=pe,
            tradeoffs={alpha: tradeoff(overall.tpr, pe, alpha) for alpha in alphas},
            degenerate=tuple(degenerate),
        )

    return FairnessReport(threshold=threshold, recall=overall.tpr, attributes=attributes)
