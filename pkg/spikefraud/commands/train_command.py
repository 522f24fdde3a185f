# pyright: strict

from argparse import ArgumentParser, Namespace
try:
    from typing import Self
except ImportError:  # Python < 3.11
    from typing_extensions import Self

from spikefraud.commands.command import Command, SubParsersAction
from spikefraud.commands.pipeline import assess, fit, metrics_report, prepare_splits, write_rows
from spikefraud.commands.run_config_command_parser import RunConfigCommandParser
from spikefraud.config.checkpoint import Checkpoint, CheckpointStore
from spikefraud.config.serialization import JsonSerializer
from spikefraud.model import csnpc
from spikefraud.system.file import ArtifactWriter


class TrainCommand (Command):

    @staticmethod
    def get_name() -> str:
        return 'train'

    @classmethod
    def get_subparser(cls, subparsers: 'SubParsersAction[ArgumentParser]') -> ArgumentParser:
        return subparsers.add_parser(
            cls.get_name(),
            prog='Train a spiking fraud detector',
            description='Split the data by month, train the network, calibrate the '
            + 'decision threshold on the validation month and report test metrics.',
            help='train a model and write a checkpoint and report',
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
        if not isinstance(value, TrainCommand):
            return False

        return self.settings == value.settings

    def run(self) -> None:
        """
        Writes to the output directory:
        - `checkpoint/` the trained model
        - `report.json` validation and test metrics with fairness
        - `history.csv` one row per epoch
        """

        run_config = self.settings.run_config
        schema = self.settings.get_schema()
        splits = prepare_splits(self.settings.get_dataset(schema), run_config.train_months)
        hyper = self.settings.get_hyper_config()

        trained = fit(hyper, run_config, splits)
        assessment = assess(
            trained.params,
            trained.model_config,
            splits.test,
            trained.threshold,
            run_config.alpha_grid,
        )

        out = run_config.out
        self.checkpoint_store.save(
            Checkpoint(
                model_config=trained.model_config,
                params=trained.params,
                schema=schema,
                norm_stats=splits.norm_stats,
                threshold=trained.threshold,
                hyper=hyper,
                metadata={
                    'command': self.get_name(),
                    'seed': run_config.seed,
                    'train_months': run_config.train_months,
                    'target_fpr': run_config.target_fpr,
                },
            ),
            self.settings.get_checkpoint_dir(),
        )

        report = {
            'command': self.get_name(),
            'seed': run_config.seed,
            'model_config': trained.model_config.to_data(),
            'hyper': hyper.to_data(),
            'param_count': csnpc.count_params(trained.params),
            'epochs_run': len(trained.history),
            'best_epoch': trained.history.best_epoch,
            'stopped_early': trained.history.stopped_early,
            'target_fpr': run_config.target_fpr,
            'threshold': trained.threshold,
            'validation': metrics_report(trained.validation),
            'test': assessment.to_report(),
        }
        self.writer.write_file_contents(out / 'report.json', self.serializer.get_serialized_data(report))
        write_rows(self.writer, out / 'history.csv', trained.history.to_rows())

        print(f'Trained {report["param_count"]} parameters for {report["epochs_run"]} epoch(s)')
        test_metrics = assessment.metrics
        print(f'Test recall {test_metrics.recall:.4f} at FPR {test_metrics.fpr:.4f} (threshold {trained.threshold})')
        print(f'Artifacts written to {out}')

    def abort(self) -> None:
        self.writer.remove_written()
