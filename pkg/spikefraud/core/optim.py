# pyright: strict

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from spikefraud.core.tensor import Array
from spikefraud.errors import InputError


ADAM_EPSILON = 1e-8


@dataclass
class AdamState:
    """
    First and second moment buffers per parameter name plus the step count.
    """

    first_moments: dict[str, Array] = field(default_factory=lambda: {})
    second_moments: dict[str, Array] = field(default_factory=lambda: {})
    step: int = 0


def adam_step(
    params: Mapping[str, Array],
    grads: Mapping[str, Array],
    state: AdamState,
    lr: float,
    beta1: float,
    beta2: float,
    weight: float = 1.0,
) -> tuple[dict[str, Array], AdamState]:
    """
    Apply one Adam update.

    Notes:
    - `weight` is a multiplicative retention factor: parameters are scaled
      by it before the Adam delta is applied (1.0 disables it)
    - Parameters without a gradient are only scaled
    - Returns new parameter arrays and a new state; inputs are not mutated
    """

    if not (0.0 < beta1 < 1.0 and 0.0 < beta2 < 1.0):
        raise InputError(f'Adam betas must be in (0, 1), got {beta1}, {beta2}')
    if not lr > 0.0:
        raise InputError(f'Learning rate must be positive, got {lr}')

    step = state.step + 1
    first_correction = 1.0 - beta1 ** step
    second_correction = 1.0 - beta2 ** step

    new_params: dict[str, Array] = {}
    new_first: dict[str, Array] = dict(state.first_moments)
    new_second: dict[str, Array] = dict(state.second_moments)

    for name, value in params.items():
        retained = weight * value
        grad = grads.get(name)
        if grad is None:
            new_params[name] = retained
            continue

        first = beta1 * state.first_moments.get(name, np.zeros_like(value)) \
            + (1.0 - beta1) * grad
        second = beta2 * state.second_moments.get(name, np.zeros_like(value)) \
            + (1.0 - beta2) * grad * grad

        first_hat = first / first_correction
        second_hat = second / second_correction

        new_params[name] = retained - lr * first_hat / (np.sqrt(second_hat) + ADAM_EPSILON)
        new_first[name] = first
        new_second[name] = second

    return new_params, AdamState(new_first, new_second, step)
