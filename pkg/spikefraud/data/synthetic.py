# pyright: strict

import logging
from dataclasses import dataclass
from typing import Collection

import numpy as np
import numpy.typing as npt

from spikefraud.core.tensor import Array
from spikefraud.data.dataset import Dataset
from spikefraud.data.schema import SENSITIVE_ATTRIBUTES
from spikefraud.errors import GenerationError
from spikefraud.fairness.metrics import DEFAULT_GROUP_SPECS


logger = logging.getLogger(__name__)

PLANTED_SHIFT = 2.0
MONTHS = 8

# the value levels each sensitive attribute is drawn from
ATTRIBUTE_LEVELS: dict[str, Array] = {
    'age': np.arange(10.0, 100.0, 10.0),
    'income': np.round(np.arange(1, 10) / 10.0, 1),
    'employment': np.arange(0.0, 7.0),
}


@dataclass(frozen=True)
class GroupBias:
    """
    Per-group fraud prevalence for one sensitive attribute.

    The minority group is the high group of the attribute's default group
    spec (e.g. customers aged 50 or older) and holds `minority_share` of
    the rows.
    """

    attribute: str
    minority_prevalence: float
    majority_prevalence: float
    minority_share: float = 0.2

    def get_violations(self) -> list[str]:
        violations: list[str] = []
        if self.attribute not in SENSITIVE_ATTRIBUTES:
            violations.append(f'unknown attribute {self.attribute!r}')
        for name, value in (
            ('minority_prevalence', self.minority_prevalence),
            ('majority_prevalence', self.majority_prevalence),
            ('minority_share', self.minority_share),
        ):
            if not 0.0 < value < 1.0:
                violations.append(f'{name} must be in (0, 1), got {value}')

        return violations


def _positive_mask(rng: np.random.Generator, n: int, prevalence: float) -> npt.NDArray[np.bool_]:
    mask = np.zeros(n, dtype=bool)
    mask[rng.permutation(n)[:int(round(n * prevalence))]] = True
    return mask


def synth_generate(
    n: int,
    prevalence: float,
    num_features: int,
    planted: Collection[int],
    group_bias: GroupBias | None = None,
    seed: int = 0,
) -> Dataset:
    """
    Generate a labelled dataset with a known signal.

    Notes:
    - Exactly `round(n * prevalence)` rows are positive; with `group_bias`
      each group gets `round(n_group * prevalence_group)` positives instead
    - Features are standard normal; positives have the planted features
      shifted by +2
    - Sensitive attributes are independent of the label unless biased
    - Months are uniform over 0..7
    """

    if n <= 0:
        raise GenerationError(f'n must be positive, got {n}')
    if not 0.0 < prevalence < 1.0:
        raise GenerationError(f'prevalence must be in (0, 1), got {prevalence}')
    if num_features <= 0:
        raise GenerationError(f'num_features must be positive, got {num_features}')
    bad_planted = sorted(i for i in planted if not 0 <= i < num_features)
    if bad_planted:
        raise GenerationError(f'planted features {bad_planted} are not in 0..{num_features - 1}')
    if group_bias is not None and group_bias.get_violations():
        raise GenerationError('Invalid group bias: ' + '; '.join(group_bias.get_violations()))

    rng = np.random.default_rng(seed)

    sensitive = {
        attribute: rng.choice(levels, size=n)
        for attribute, levels in ATTRIBUTE_LEVELS.items()
    }

    if group_bias is None:
        labels = _positive_mask(rng, n, prevalence)
    else:
        spec = DEFAULT_GROUP_SPECS[group_bias.attribute]
        levels = ATTRIBUTE_LEVELS[group_bias.attribute]
        high_levels, low_levels = levels[levels >= spec.cut], levels[levels < spec.cut]

        minority = np.zeros(n, dtype=bool)
        minority[rng.permutation(n)[:int(round(n * group_bias.minority_share))]] = True

        values = np.empty(n, dtype=np.float64)
        values[minority] = rng.choice(high_levels, size=int(minority.sum()))
        values[~minority] = rng.choice(low_levels, size=int((~minority).sum()))
        sensitive[group_bias.attribute] = values

        labels = np.zeros(n, dtype=bool)
        for group, group_prevalence in (
            (minority, group_bias.minority_prevalence),
            (~minority, group_bias.majority_prevalence),
        ):
            rows = np.flatnonzero(group)
            labels[rows] = _positive_mask(rng, rows.size, group_prevalence)

    positives = int(labels.sum())
    if positives == 0:
        raise GenerationError(f'{n} rows are too few to contain a positive at the requested prevalence')
    if positives == n:
        raise GenerationError(f'{n} rows leave no negative at the requested prevalence')

    features = rng.standard_normal((n, num_features))
    planted_columns = np.asarray(sorted(planted), dtype=np.int64)
    if planted_columns.size:
        features[np.ix_(labels, planted_columns)] += PLANTED_SHIFT

    month = rng.integers(0, MONTHS, size=n).astype(np.int64)

    logger.info(
        'Generated %d rows, %d positives, planted features %s',
        n,
        positives,
        planted_columns.tolist(),
    )

    return Dataset(
        features=features,
        labels=labels.astype(np.int64),
        month=month,
        sensitive=sensitive,
        feature_names=tuple(f'feature_{i:02d}' for i in range(num_features)),
    )
