# pyright: strict

import logging
import math
from argparse import ArgumentParser, Namespace
try:
    from typing import Self
except ImportError:  # Python < 3.11
    from typing_extensions import Self

from spikefraud.commands.command import Command, SubParsersAction
from spikefraud.commands.pipeline import Splits, TrainedModel, assess, fit, metrics_report, prepare_splits, write_rows
from spikefraud.commands.run_config_command_parser import RunConfigCommandParser
from spikefraud.config.checkpoint import Checkpoint, CheckpointStore
from spikefraud.config.run_config import RunConfig
from spikefraud.config.serialization import JsonSerializer
from spikefraud.errors import TrialError
from spikefraud.fairness.metrics import fairness_report
from spikefraud.model import csnpc
from spikefraud.search.rhoss import RewardFn, fairness_weighted_reward, metrics_reward, optimize
from spikefraud.search.space import HyperConfig
from spikefraud.system.file import ArtifactWriter
from spikefraud.training.metrics import EvalMetrics


logger = logging.getLogger(__name__)


class ValidationEvaluator:
    """
    Scores a hyperparameter config by training a model on the train split
    and measuring it on the validation split at the calibrated threshold.

    Only the model with the highest reward so far is kept (the first one on
    ties, as the search does), so memory does not grow with the budget.
    """

    def __init__(self, run_config: RunConfig, splits: Splits) -> None:
        super().__init__()

        self.run_config = run_config
        self.splits = splits
        self.min_pe: dict[HyperConfig, float] = {}
        self.best_config: HyperConfig | None = None
        self.best_model: TrainedModel | None = None
        self.best_reward = -math.inf

        if run_config.fairness_weight > 0.0:
            self.reward_fn: RewardFn = fairness_weighted_reward(run_config.fairness_weight, self.min_pe.__getitem__)
        else:
            self.reward_fn = metrics_reward

    def __call__(self, config: HyperConfig) -> EvalMetrics:
        trained = fit(config, self.run_config, self.splits)

        if self.run_config.fairness_weight > 0.0:
            validation = self.splits.validation
            scores = csnpc.score(trained.params, trained.model_config, validation.features)
            report = fairness_report(scores, validation.labels, validation.sensitive, trained.threshold)
            self.min_pe[config] = report.min_pe()

        reward = self.reward_fn(config, trained.validation)
        if self.best_model is None or reward > self.best_reward:
            self.best_config = config
            self.best_model = trained
            self.best_reward = reward

        return trained.validation

    def get_model(self, config: HyperConfig) -> TrainedModel:
        assert self.best_model is not None and self.best_config == config, \
            'The search kept a different best config than its evaluator'

        return self.best_model


class OptimizeCommand (Command):

    @staticmethod
    def get_name() -> str:
        return 'optimize'

    @classmethod
    def get_subparser(cls, subparsers: 'SubParsersAction[ArgumentParser]') -> ArgumentParser:
        return subparsers.add_parser(
            cls.get_name(),
            prog='Search hyperparameters with the Q-learning hyper-heuristic',
            description='Train one model per trial, reward it on the validation month '
            + 'and keep the best configuration and its checkpoint.',
            help='optimize hyperparameters',
        )

    @classmethod
    def add_arguments(cls, parser: ArgumentParser) -> ArgumentParser:
        RunConfigCommandParser.add_arguments(parser)

        return parser

    @classmethod
    def create_from_arguments(cls, parsed_arguments: Namespace) -> Self:
        settings = RunConfigCommandParser.create_from_arguments(parsed_arguments)
        writer = ArtifactWriter()

        return cls(
            settings=settings,
            writer=writer,
            serializer=JsonSerializer(),
            checkpoint_store=CheckpointStore(settings.file_reader, writer, JsonSerializer()),
        )

    def __init__(
        self,
        settings: RunConfigCommandParser,
        writer: ArtifactWriter,
        serializer: JsonSerializer,
        checkpoint_store: CheckpointStore,
    ) -> None:
        super().__init__()

        self.settings = settings
        self.writer = writer
        self.serializer = serializer
        self.checkpoint_store = checkpoint_store

    def __eq__(self, value: object) -> bool:
        if not isinstance(value, OptimizeCommand):
            return False

        return self.settings == value.settings

    def run(self) -> None:
        """
        Writes to the output directory:
        - `best_config.json` the best HyperConfig (usable with `--hyper`)
        - `trials.csv` one row per evaluated config, the initial one included
        - `q_table.json` the final action values
        - `report.json` best trial with its validation and test metrics
        - `checkpoint/` the model of the best trial
        """

        run_config = self.settings.run_config
        schema = self.settings.get_schema()
        splits = prepare_splits(self.settings.get_dataset(schema), run_config.train_months)

        evaluator = ValidationEvaluator(run_config, splits)
        result = optimize(
            run_config.budget,
            evaluator,
            run_config.seed,
            reward_fn=evaluator.reward_fn,
            alpha=run_config.q_alpha,
            gamma=run_config.q_gamma,
            epsilon=run_config.epsilon,
        )

        best = result.best
        if best.failed:
            raise TrialError(f'Every trial failed, the last error was: {best.error}')
        trained = evaluator.get_model(best.config)
        logger.info('Evaluating trial %d on %d test rows', best.trial_index, len(splits.test))

        assessment = assess(
            trained.params,
            trained.model_config,
            splits.test,
            trained.threshold,
            run_config.alpha_grid,
        )

        out = run_config.out
        self.writer.write_file_contents(
            out / 'best_config.json',
            self.serializer.get_serialized_data(best.config.to_data()),
        )
        write_rows(
            self.writer,
            out / 'trials.csv',
            [
                {**trial.to_row(), 'best_reward': best_reward}
                for trial, best_reward in zip(result.trials, result.best_rewards)
            ],
        )
        self.writer.write_file_contents(
            out / 'q_table.json',
            self.serializer.get_serialized_data(result.q_table.to_data()),
        )
        self.checkpoint_store.save(
            Checkpoint(
                model_config=trained.model_config,
                params=trained.params,
                schema=schema,
                norm_stats=splits.norm_stats,
                threshold=trained.threshold,
                hyper=best.config,
                metadata={
                    'command': self.get_name(),
                    'seed': run_config.seed,
                    'train_months': run_config.train_months,
                    'target_fpr': run_config.target_fpr,
                    'trial': best.trial_index,
                },
            ),
            self.settings.get_checkpoint_dir(),
        )

        report = {
            'command': self.get_name(),
            'seed': run_config.seed,
            'budget': run_config.budget,
            'trials': len(result.trials),
            'failed_trials': sum(1 for trial in result.trials if trial.failed),
            'best_trial': best.trial_index,
            'best_reward': best.reward,
            'hyper': best.config.to_data(),
            'threshold': trained.threshold,
            'validation': metrics_report(trained.validation),
            'test': assessment.to_report(),
        }
        self.writer.write_file_contents(out / 'report.json', self.serializer.get_serialized_data(report))

        print(f'Best trial {best.trial_index} of {len(result.trials)} with reward {best.reward:.6f}')
        print(f'Artifacts written to {out}')

    def abort(self) -> None:
        self.writer.remove_written()
