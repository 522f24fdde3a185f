# pyright: strict

from argparse import ArgumentParser, Namespace
try:
    from typing import Self
except ImportError:  # Python < 3.11
    from typing_extensions import Self

import numpy as np

from spikefraud.commands.command import Command, SubParsersAction
from spikefraud.commands.evaluate_command import load_checkpoint_data
from spikefraud.commands.pipeline import write_rows
from spikefraud.commands.run_config_command_parser import RunConfigCommandParser
from spikefraud.config.checkpoint import CheckpointStore
from spikefraud.config.serialization import JsonSerializer
from spikefraud.errors import InputError
from spikefraud.system.file import ArtifactWriter
from spikefraud.xai.explain import explain_many, normalized_importance


DEFAULT_SAMPLE_COUNT = 10


class ExplainCommand (Command):

    @staticmethod
    def get_name() -> str:
        return 'explain'

    @classmethod
    def get_subparser(cls, subparsers: 'SubParsersAction[ArgumentParser]') -> ArgumentParser:
        return subparsers.add_parser(
            cls.get_name(),
            prog='Explain predictions of a checkpoint',
            description='Saliency and output spike activity of selected rows, plus '
            + 'the normalized mean saliency of every feature over those rows.',
            help='explain model predictions',
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
        if not isinstance(value, ExplainCommand):
            return False

        return self.settings == value.settings

    def run(self) -> None:
        """
        Writes to the output directory:
        - `explanations.json` one record per sample row (indices into the
          data file, default the first ten rows), explained against its label
        - `importance.csv` one row per feature with its normalized mean saliency
        """

        run_config = self.settings.run_config
        checkpoint, dataset = load_checkpoint_data(self.settings, self.checkpoint_store)

        indices = list(run_config.samples) or list(range(min(DEFAULT_SAMPLE_COUNT, len(dataset))))
        out_of_range = [index for index in indices if not 0 <= index < len(dataset)]
        if out_of_range:
            raise InputError(f'Sample indices {out_of_range} are outside the {len(dataset)} data rows')

        rows = dataset.take(np.asarray(indices, dtype=np.int64))
        explanations = explain_many(checkpoint.params, checkpoint.model_config, rows.features, rows.labels)

        records = [
            {'index': index, 'label': int(label), **explanation.to_data()}
            for index, label, explanation in zip(indices, rows.labels, explanations)
        ]

        importance = normalized_importance(explanations)

        out = run_config.out
        self.writer.write_file_contents(
            out / 'explanations.json',
            self.serializer.get_serialized_data(records),
        )
        write_rows(
            self.writer,
            out / 'importance.csv',
            [
                {'feature': name, 'importance': float(value)}
                for name, value in zip(dataset.feature_names, importance)
            ],
        )

        print(f'Explained {len(records)} row(s); artifacts written to {out}')

    def abort(self) -> None:
        self.writer.remove_written()
