# pyright: strict

"""
Reinforcement-guided hyper-heuristic search.

A tabular Q-learning agent picks one of ten low-level heuristics per
trial; the state is the search phase (fifth of the budget) the trial falls
in. Heuristic 0 samples a fresh configuration, 1..9 perturb the best
configuration found so far:

    1 decays          4 learning rate     7 small jitter of every field
    2 thresholds      5 Adam betas        8 resample one random field
    3 spike slope     6 Adam weight       9 large jitter of one random field
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np
import numpy.typing as npt

from spikefraud.errors import ConfigError, InputError, SpikeFraudError
from spikefraud.search.space import DEFAULT_SPACE, HyperConfig, SearchSpace
from spikefraud.system.error_handler import ErrorHandler, RecordingErrorHandler
from spikefraud.training.metrics import EvalMetrics


logger = logging.getLogger(__name__)

NUM_STATES = 5
NUM_ACTIONS = 10

SMALL_JITTER = 0.1
LARGE_JITTER = 0.5

EPSILON_FLOOR = 0.05
EPSILON_DECAY = 0.99

FAILED_REWARD = -1.0

Evaluator = Callable[[HyperConfig], EvalMetrics]
RewardFn = Callable[[HyperConfig, EvalMetrics], float]


class QTable:
    """
    Action values of the agent, `NUM_STATES x NUM_ACTIONS`, zero
    initialised.
    """

    def __init__(self, q: npt.ArrayLike | None = None) -> None:
        super().__init__()

        if q is None:
            self.q = np.zeros((NUM_STATES, NUM_ACTIONS), dtype=np.float64)
        else:
            self.q = np.array(q, dtype=np.float64)
            if self.q.shape != (NUM_STATES, NUM_ACTIONS):
                raise ConfigError(
                    'Q-table',
                    [f'expected shape {(NUM_STATES, NUM_ACTIONS)}, got {self.q.shape}'],
                )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QTable):
            return NotImplemented

        return bool(np.array_equal(self.q, other.q))

    def row(self, state: int) -> npt.NDArray[np.float64]:
        return self.q[state]

    def to_data(self) -> dict[str, Any]:
        return {
            'states': NUM_STATES,
            'actions': NUM_ACTIONS,
            'q': [[float(v) for v in row] for row in self.q],
        }

    @classmethod
    def create_from_data(cls, data: Mapping[str, Any]) -> 'QTable':
        return cls(data['q'])


@dataclass(frozen=True)
class TrialResult:
    """
    One evaluated configuration.

    Notes:
    - Trial 0 is the initial sampled configuration; its state and action
      are 0
    - A failed trial has no metrics, reward -1 and the error message
    """

    trial_index: int
    state: int
    action: int
    epsilon: float
    config: HyperConfig
    reward: float
    metrics: EvalMetrics | None = None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.metrics is None

    def to_row(self) -> dict[str, Any]:
        metrics: dict[str, Any] = {}
        if self.metrics is not None:
            metrics = {key: value for key, value in self.metrics.to_data().items() if key != 'degenerate'}

        return {
            'trial': self.trial_index,
            'state': self.state,
            'action': self.action,
            'epsilon': self.epsilon,
            'reward': self.reward,
            **metrics,
            **self.config.to_data(),
            'error': self.error or '',
        }


@dataclass
class OptimizationResult:
    """
    Outcome of a search. `best_rewards` holds the reward of the best trial
    after every trial, -inf while no trial has succeeded.
    """

    best: TrialResult
    trials: list[TrialResult] = field(default_factory=lambda: [])
    q_table: QTable = field(default_factory=QTable)
    best_rewards: list[float] = field(default_factory=lambda: [])


def sample_initial(rng: np.random.Generator, space: SearchSpace = DEFAULT_SPACE) -> HyperConfig:
    """Draw every field from its prior (heuristic 0)."""

    return space.sample(rng)


def perturb(
    base: HyperConfig,
    llh: int,
    rng: np.random.Generator,
    space: SearchSpace = DEFAULT_SPACE,
    small: float = SMALL_JITTER,
    large: float = LARGE_JITTER,
) -> HyperConfig:
    """
    Apply low-level heuristic `llh` (1..9) to `base`; fields a heuristic
    does not target are left untouched. Results are clamped to the space.
    """

    if llh in (1, 2, 3, 4, 5, 6):
        return space.jitter(base, space.get_group(llh), small, rng)

    if llh == 7:
        return space.jitter(base, space.fields, small, rng)

    if llh in (8, 9):
        target = space.fields[int(rng.integers(len(space.fields)))]
        if llh == 8:
            return space.clamp(HyperConfig(**{**base.to_data(), target.name: target.sample(rng)}))
        return space.jitter(base, (target,), large, rng)

    raise InputError(f'Low-level heuristic must be in 1..9, got {llh}')


def state_of(t: int, budget: int) -> int:
    """Search phase `floor(5 t / T)` of trial `t`, clamped to the last phase."""

    if budget <= 0:
        raise InputError(f'Budget must be positive, got {budget}')
    if t < 0:
        raise InputError(f'Trial index must be >= 0, got {t}')

    return min((t * NUM_STATES) // budget, NUM_STATES - 1)


def select_action(q_row: Sequence[float] | npt.NDArray[np.float64], epsilon: float, rng: np.random.Generator) -> int:
    """
    Epsilon-greedy choice; greedy ties go to the lowest action.

    One uniform draw is always taken first, so the generator advances the
    same way whatever the branch.
    """

    if not 0.0 <= epsilon <= 1.0:
        raise InputError(f'epsilon must be in [0, 1], got {epsilon}')

    values = np.asarray(q_row, dtype=np.float64)
    if values.shape != (NUM_ACTIONS,):
        raise InputError(f'Q row must have {NUM_ACTIONS} values, got shape {values.shape}')

    if rng.random() < epsilon:
        return int(rng.integers(NUM_ACTIONS))

    return int(np.argmax(values))


def reward(m: EvalMetrics) -> float:
    """
    `recall - fpr`, plus 1 when accuracy exceeds 0.95, minus 0.5 when
    positives exist but none is caught.
    """

    bonus = 1.0 if m.accuracy > 0.95 else 0.0
    penalty = 0.5 if m.tp == 0 and m.tp + m.fn > 0 else 0.0

    return m.tpr - m.fpr + bonus - penalty


def metrics_reward(config: HyperConfig, metrics: EvalMetrics) -> float:
    return reward(metrics)


def q_update(
    q: QTable,
    s: int,
    a: int,
    r: float,
    s_next: int,
    alpha: float = 0.1,
    gamma: float = 0.9,
) -> None:
    """Temporal difference update of `q[s, a]` in place."""

    for name, value, limit in (('s', s, NUM_STATES), ('s_next', s_next, NUM_STATES), ('a', a, NUM_ACTIONS)):
        if not 0 <= value < limit:
            raise InputError(f'{name} must be in 0..{limit - 1}, got {value}')

    target = r + gamma * float(q.q[s_next].max())
    q.q[s, a] += alpha * (target - q.q[s, a])


def decay_epsilon(epsilon: float) -> float:
    return max(EPSILON_FLOOR, epsilon * EPSILON_DECAY)


class _TrialRunner:
    """Evaluates configurations, turning evaluator errors into failed trials."""

    def __init__(self, evaluator: Evaluator, reward_fn: RewardFn) -> None:
        super().__init__()

        self.evaluator = evaluator
        self.reward_fn = reward_fn
        self.error_handler = RecordingErrorHandler(SpikeFraudError)

    def run(self, trial_index: int, state: int, action: int, epsilon: float, config: HyperConfig) -> TrialResult:
        outcome: list[EvalMetrics] = []
        status = self.error_handler.try_run(lambda: outcome.append(self.evaluator(config)))

        if status is not ErrorHandler.Status.SUCCESS:
            result = TrialResult(
                trial_index=trial_index,
                state=state,
                action=action,
                epsilon=epsilon,
                config=config,
                reward=FAILED_REWARD,
                error=str(self.error_handler.last_error),
            )
        else:
            metrics = outcome[0]
            result = TrialResult(
                trial_index=trial_index,
                state=state,
                action=action,
                epsilon=epsilon,
                config=config,
                reward=self.reward_fn(config, metrics),
                metrics=metrics,
            )

        logger.info(
            'Trial %d (state %d, action %d): reward %.6f%s',
            trial_index,
            state,
            action,
            result.reward,
            ' (failed)' if result.failed else '',
        )
        return result


def _best_reward(best: TrialResult) -> float:
    return -math.inf if best.failed else best.reward


def _improves(candidate: TrialResult, best: TrialResult) -> bool:
    if candidate.failed:
        return False
    if best.failed:
        return True

    return candidate.reward > best.reward


def optimize(
    budget: int,
    evaluator: Evaluator,
    rng_seed: int,
    reward_fn: RewardFn = metrics_reward,
    alpha: float = 0.1,
    gamma: float = 0.9,
    epsilon: float = 1.0,
    space: SearchSpace = DEFAULT_SPACE,
) -> OptimizationResult:
    """
    Run the hyper-heuristic for `budget` trials after the initial one.

    Notes:
    - Candidates are derived from the best configuration so far
    - The best is replaced on strict reward improvement by a trial that
      did not fail; a failed initial trial is replaced by the first trial
      that succeeds, whatever its reward
    - Deterministic for a fixed seed and a deterministic evaluator
    """

    if budget < 1:
        raise InputError(f'Budget must be >= 1, got {budget}')
    if not 0.0 <= epsilon <= 1.0:
        raise InputError(f'epsilon must be in [0, 1], got {epsilon}')

    rng = np.random.default_rng(rng_seed)
    runner = _TrialRunner(evaluator, reward_fn)
    q_table = QTable()

    best = runner.run(0, 0, 0, epsilon, sample_initial(rng, space))
    trials = [best]
    best_rewards = [_best_reward(best)]

    for t in range(1, budget + 1):
        state = state_of(t, budget)
        action = select_action(q_table.row(state), epsilon, rng)

        if action == 0:
            candidate = sample_initial(rng, space)
        else:
            candidate = perturb(best.config, action, rng, space)

        result = runner.run(t, state, action, epsilon, candidate)
        trials.append(result)
        if _improves(result, best):
            best = result
        best_rewards.append(_best_reward(best))

        q_update(q_table, state, action, result.reward, state_of(t + 1, budget), alpha, gamma)
        epsilon = decay_epsilon(epsilon)

    logger.info('Best trial %d with reward %.6f', best.trial_index, best.reward)
    return OptimizationResult(best=best, trials=trials, q_table=q_table, best_rewards=best_rewards)


def random_search(
    budget: int,
    evaluator: Evaluator,
    rng_seed: int,
    reward_fn: RewardFn = metrics_reward,
    space: SearchSpace = DEFAULT_SPACE,
) -> OptimizationResult:
    """Baseline drawing every trial from the prior; same result shape as `optimize`."""

    if budget < 1:
        raise InputError(f'Budget must be >= 1, got {budget}')

    rng = np.random.default_rng(rng_seed)
    runner = _TrialRunner(evaluator, reward_fn)

    best = runner.run(0, 0, 0, 1.0, sample_initial(rng, space))
    trials = [best]
    best_rewards = [_best_reward(best)]
    for t in range(1, budget + 1):
        result = runner.run(t, state_of(t, budget), 0, 1.0, sample_initial(rng, space))
        trials.append(result)
        if _improves(result, best):
            best = result
        best_rewards.append(_best_reward(best))

    return OptimizationResult(best=best, trials=trials, q_table=QTable(), best_rewards=best_rewards)


def fairness_weighted_reward(weight: float, min_pe: Callable[[HyperConfig], float]) -> RewardFn:
    """
    Reward plus `weight` times the worst predictive equality of the
    evaluated configuration. `min_pe` looks the value up for a config the
    evaluator has just scored.
    """

    if weight < 0.0 or not math.isfinite(weight):
        raise InputError(f'Fairness weight must be finite and >= 0, got {weight}')

    def reward_fn(config: HyperConfig, metrics: EvalMetrics) -> float:
        return reward(metrics) + weight * min_pe(config)

    return reward_fn
