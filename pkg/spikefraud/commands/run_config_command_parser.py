# pyright: strict

from argparse import ArgumentParser, Namespace
from pathlib import Path
from typing import Any
try:
    from typing import Self
except ImportError:  # Python < 3.11
    from typing_extensions import Self

import yaml

from spikefraud.commands.command import CommandArgumentParserBuilder
from spikefraud.config.run_config import RunConfig, load_run_config_data
from spikefraud.config.serialization import YamlDeserializer
from spikefraud.data.dataset import Dataset, load_csv
from spikefraud.data.schema import Schema, load_schema
from spikefraud.errors import ConfigError, SchemaError
from spikefraud.search.space import HyperConfig
from spikefraud.system.file import FileReader
from spikefraud.system.path import get_validated_file_path
from spikefraud.utils.defaults import Defaults


# flag -> RunConfig field, in help order
FLAGS: dict[str, tuple[str, type, str]] = {
    '--data': ('data', Path, 'CSV data file'),
    '--schema': ('schema', Path, 'schema file (default: Bank Account Fraud columns)'),
    '--out': ('out', Path, 'output directory'),
    '--seed': ('seed', int, 'random seed'),
    '--population': ('population', int, 'output population size P (even)'),
    '--timesteps': ('timesteps', int, 'simulation timesteps T'),
    '--epochs': ('epochs', int, 'training epochs'),
    '--batch': ('batch', int, 'mini-batch size'),
    '--train-months': ('train_months', int, 'months before the test split'),
    '--early-stop-patience': ('early_stop_patience', int, 'epochs without improvement before stopping (0 disables)'),
    '--target-fpr': ('target_fpr', float, 'false positive rate thresholds are calibrated at'),
    '--alpha-grid': ('alpha_grid', str, 'comma separated trade-off weights in [0, 1]'),
    '--budget': ('budget', int, 'optimizer trials after the initial one'),
    '--q-alpha': ('q_alpha', float, 'Q-learning rate'),
    '--q-gamma': ('q_gamma', float, 'Q-learning discount'),
    '--epsilon': ('epsilon', float, 'initial exploration rate'),
    '--fairness-weight': ('fairness_weight', float, 'weight of the worst predictive equality in the optimizer reward (0 disables)'),
    '--hyper': ('hyper', Path, 'hyperparameter file, e.g. best_config.json of optimize'),
    '--checkpoint': ('checkpoint', Path, 'checkpoint directory (default: <out>/checkpoint)'),
    '--samples': ('samples', str, 'comma separated row indices to explain'),
}


class RunConfigCommandParser (CommandArgumentParserBuilder):
    """
    Command parser & builder for commands driven by a `RunConfig`.

    Settings come from the built-in defaults, then the `--config` file, then
    the flags; a flag that is not given does not override the file.
    """

    @classmethod
    def add_arguments(cls, parser: ArgumentParser) -> ArgumentParser:
        parser.add_argument(
            '--config',
            type=Path,
            default=None,
            help='run config file (flat JSON or YAML object of settings)',
        )

        for flag, (dest, kind, help_text) in FLAGS.items():
            parser.add_argument(flag, dest=dest, type=kind, default=None, help=help_text)

        return parser

    @classmethod
    def create_from_arguments(cls, parsed_arguments: Namespace) -> Self:
        file_reader = FileReader()
        run_config = Defaults().get_run_config()

        config_path: Path | None = parsed_arguments.config
        if config_path is not None:
            config_path = get_validated_file_path(config_path)
            run_config = run_config.merge(load_run_config_data(file_reader, config_path))

        flags: dict[str, Any] = {
            dest: getattr(parsed_arguments, dest, None)
            for dest, _, _ in FLAGS.values()
        }
        run_config = run_config.merge(flags).validate()

        return cls(run_config=run_config, file_reader=file_reader)

    def __init__(self, run_config: RunConfig, file_reader: FileReader) -> None:
        super().__init__()

        self.run_config = run_config
        self.file_reader = file_reader

    def __eq__(self, value: object) -> bool:
        if not isinstance(value, RunConfigCommandParser):
            return False

        return self.run_config == value.run_config

    def get_schema(self) -> Schema:
        if self.run_config.schema is None:
            return Defaults().get_schema()

        path = self.run_config.schema.expanduser()
        if not path.is_file():
            raise SchemaError(f'Schema file {path} does not exist')

        return load_schema(self.file_reader, path)

    def get_dataset(self, schema: Schema) -> Dataset:
        if self.run_config.data is None:
            raise ConfigError('run config', ['no data file given (--data)'])

        return load_csv(get_validated_file_path(self.run_config.data), schema)

    def get_hyper_config(self) -> HyperConfig:
        if self.run_config.hyper is None:
            return Defaults().get_hyper_config()

        path = get_validated_file_path(self.run_config.hyper)
        try:
            data = YamlDeserializer().get_data_from_file(self.file_reader, path)
        except (OSError, yaml.YAMLError) as e:
            raise ConfigError('hyperparameter config', [f'cannot read {path}: {e}']) from e

        hyper = HyperConfig.create_from_data(data)
        hyper.validate()
        return hyper

    def get_checkpoint_dir(self) -> Path:
        return self.run_config.checkpoint or Defaults().get_checkpoint_dir(self.run_config.out)
