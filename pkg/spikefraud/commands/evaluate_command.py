# pyright: strict

from argparse import ArgumentParser, Namespace
try:
    from typing import Self
except ImportError:  # Python < 3.11
    from typing_extensions import Self

from spikefraud.commands.command import Command, SubParsersAction
from spikefraud.commands.pipeline import assess
from spikefraud.commands.run_config_command_parser import RunConfigCommandParser
from spikefraud.config.checkpoint import Checkpoint, CheckpointStore
from spikefraud.config.serialization import JsonSerializer
from spikefraud.data.dataset import Dataset, temporal_split
from spikefraud.errors import SchemaError
from spikefraud.system.file import ArtifactWriter


def load_checkpoint_data(settings: RunConfigCommandParser, store: CheckpointStore) -> tuple[Checkpoint, Dataset]:
    """
    Load the checkpoint and the data file read with the checkpoint's schema,
    normalized with the checkpoint's statistics.
    """

    checkpoint = store.load(settings.get_checkpoint_dir())
    if settings.run_config.schema is not None:
        given = settings.get_schema()
        if given.digest() != checkpoint.schema.digest():
            raise SchemaError('The given schema differs from the schema the checkpoint was trained with')

    dataset = settings.get_dataset(checkpoint.schema)
    if dataset.num_features != checkpoint.model_config.num_features:
        raise SchemaError(
            f'Data has {dataset.num_features} features, the model expects '
            + f'{checkpoint.model_config.num_features}',
        )

    return checkpoint, checkpoint.norm_stats.apply(dataset)


class EvaluateCommand (Command):

    @staticmethod
    def get_name() -> str:
        return 'evaluate'

    @classmethod
    def get_subparser(cls, subparsers: 'SubParsersAction[ArgumentParser]') -> ArgumentParser:
        return subparsers.add_parser(
            cls.get_name(),
            prog='Evaluate a checkpoint',
            description='Report metrics and predictive equality of a checkpoint on the '
            + 'test months of a data file at the calibrated threshold.',
            help='evaluate a trained model',
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
        if not isinstance(value, EvaluateCommand):
            return False

        return self.settings == value.settings

    def run(self) -> None:
        """
        Writes `evaluation.json` to the output directory. The test split
        is the rows from `train_months` on.
        """

        run_config = self.settings.run_config
        checkpoint, dataset = load_checkpoint_data(self.settings, self.checkpoint_store)
        _, test = temporal_split(dataset, run_config.train_months)

        assessment = assess(
            checkpoint.params,
            checkpoint.model_config,
            test,
            checkpoint.threshold,
            run_config.alpha_grid,
        )

        report = {
            'command': self.get_name(),
            'threshold': checkpoint.threshold,
            'test': assessment.to_report(),
        }
        path = run_config.out / 'evaluation.json'
        self.writer.write_file_contents(path, self.serializer.get_serialized_data(report))

        metrics = assessment.metrics
        print(f'Recall {metrics.recall:.4f} at FPR {metrics.fpr:.4f}, accuracy {metrics.accuracy:.4f}')
        print(f'Report written to {path}')

    def abort(self) -> None:
        self.writer.remove_written()
