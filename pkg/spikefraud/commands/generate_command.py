# pyright: strict

from argparse import ArgumentParser, Namespace
from pathlib import Path
try:
    from typing import Self
except ImportError:  # Python < 3.11
    from typing_extensions import Self

from spikefraud.commands.command import Command, SubParsersAction
from spikefraud.config.serialization import JsonSerializer
from spikefraud.data.dataset import write_csv
from spikefraud.data.schema import Schema
from spikefraud.data.synthetic import GroupBias, synth_generate
from spikefraud.errors import GenerationError
from spikefraud.system.file import ArtifactWriter
from spikefraud.utils.defaults import Defaults


class GenerateCommand (Command):

    @staticmethod
    def get_name() -> str:
        return 'generate'

    @classmethod
    def get_subparser(cls, subparsers: 'SubParsersAction[ArgumentParser]') -> ArgumentParser:
        return subparsers.add_parser(
            cls.get_name(),
            prog='Generate a synthetic fraud data set',
            description='Write a CSV with a planted signal on selected features and '
            + 'the schema to read it with.',
            help='generate synthetic data',
        )

    @classmethod
    def add_arguments(cls, parser: ArgumentParser) -> ArgumentParser:
        parser.add_argument('--out', type=Path, default=None, help='output directory')
        parser.add_argument('--seed', type=int, default=0, help='random seed')
        parser.add_argument('--rows', type=int, default=20000, help='number of rows')
        parser.add_argument('--prevalence', type=float, default=0.011, help='fraction of fraud rows')
        parser.add_argument('--features', type=int, default=30, help='number of features')
        parser.add_argument(
            '--planted',
            type=str,
            default='0,1,2,3,4',
            help='comma separated feature indices shifted for fraud rows (empty for no signal)',
        )
        parser.add_argument(
            '--bias-attribute',
            choices=('age', 'income', 'employment'),
            default=None,
            help='give the high group of this attribute its own fraud prevalence',
        )
        parser.add_argument('--minority-prevalence', type=float, default=0.019)
        parser.add_argument('--majority-prevalence', type=float, default=0.004)
        parser.add_argument('--minority-share', type=float, default=0.2)

        return parser

    @classmethod
    def create_from_arguments(cls, parsed_arguments: Namespace) -> Self:
        try:
            planted = tuple(
                int(item)
                for item in str(parsed_arguments.planted).replace(',', ' ').split()
            )
        except ValueError as e:
            raise GenerationError(f'Invalid planted feature list {parsed_arguments.planted!r}') from e

        group_bias = None
        if parsed_arguments.bias_attribute is not None:
            group_bias = GroupBias(
                attribute=parsed_arguments.bias_attribute,
                minority_prevalence=parsed_arguments.minority_prevalence,
                majority_prevalence=parsed_arguments.majority_prevalence,
                minority_share=parsed_arguments.minority_share,
            )

        return cls(
            out=parsed_arguments.out or Defaults().get_run_config().out,
            seed=parsed_arguments.seed,
            rows=parsed_arguments.rows,
            prevalence=parsed_arguments.prevalence,
            features=parsed_arguments.features,
            planted=planted,
            group_bias=group_bias,
            writer=ArtifactWriter(),
        )

    def __init__(
        self,
        out: Path,
        seed: int,
        rows: int,
        prevalence: float,
        features: int,
        planted: tuple[int, ...],
        group_bias: GroupBias | None,
        writer: ArtifactWriter,
    ) -> None:
        super().__init__()

        self.out = out
        self.seed = seed
        self.rows = rows
        self.prevalence = prevalence
        self.features = features
        self.planted = planted
        self.group_bias = group_bias
        self.writer = writer

    def __eq__(self, value: object) -> bool:
        if not isinstance(value, GenerateCommand):
            return False

        return self.out == value.out \
            and self.seed == value.seed \
            and self.rows == value.rows \
            and self.prevalence == value.prevalence \
            and self.features == value.features \
            and self.planted == value.planted \
            and self.group_bias == value.group_bias

    def run(self) -> None:
        """Writes `data.csv` and `schema.json` to the output directory."""

        dataset = synth_generate(
            self.rows,
            self.prevalence,
            self.features,
            self.planted,
            group_bias=self.group_bias,
            seed=self.seed,
        )
        schema = Schema.create_synthetic(self.features)

        write_csv(dataset, self.writer.track(self.out / 'data.csv'), schema)
        self.writer.write_file_contents(
            self.out / 'schema.json',
            JsonSerializer().get_serialized_data(schema.to_data()),
        )

        print(f'Generated {len(dataset)} rows ({int(dataset.labels.sum())} fraud) in {self.out}')

    def abort(self) -> None:
        self.writer.remove_written()
