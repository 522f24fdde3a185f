# pyright: strict

import json
import tempfile
from argparse import ArgumentParser, Namespace
from pathlib import Path
from unittest.mock import patch

from spikefraud.commands.generate_command import GenerateCommand
from spikefraud.data.dataset import load_csv
from spikefraud.data.schema import Schema
from spikefraud.data.synthetic import GroupBias
from spikefraud.errors import GenerationError
from spikefraud.system.file import ArtifactWriter
from test.test_case import TestCase


def _parse(*argv: str) -> Namespace:
    return GenerateCommand.add_arguments(ArgumentParser()).parse_args(list(argv))


class TestGenerateCommand(TestCase):

    def setUp(self) -> None:
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.out = Path(directory.name) / 'synthetic'

    def test_get_name(self) -> None:
        # Act & Assert
        self.assertEqual(GenerateCommand.get_name(), 'generate')

    def test_get_subparser(self) -> None:
        # Act
        actual = GenerateCommand.get_subparser(ArgumentParser().add_subparsers())

        # Assert
        self.assertIn('synthetic', actual.format_help())

    def test_defaults(self) -> None:
        # Act
        command = GenerateCommand.create_from_arguments(_parse('--out', str(self.out)))

        # Assert
        self.assertEqual(
            command,
            GenerateCommand(
                out=self.out,
                seed=0,
                rows=20000,
                prevalence=0.011,
                features=30,
                planted=(0, 1, 2, 3, 4),
                group_bias=None,
                writer=ArtifactWriter(),
            ),
        )

    def test_group_bias_arguments(self) -> None:
        # Act
        command = GenerateCommand.create_from_arguments(
            _parse('--out', str(self.out), '--bias-attribute', 'income', '--minority-share', '0.3', '--planted', ''),
        )

        # Assert
        self.assertEqual(command.group_bias, GroupBias('income', 0.019, 0.004, 0.3))
        self.assertEqual(command.planted, ())

    def test_bad_planted_list_raises(self) -> None:
        # Act & Assert
        with self.assertRaises(GenerationError):
            GenerateCommand.create_from_arguments(_parse('--planted', '1,x'))

    def test_run_writes_data_and_schema(self) -> None:
        # Arrange
        command = GenerateCommand.create_from_arguments(
            _parse('--out', str(self.out), '--rows', '200', '--prevalence', '0.05', '--features', '15'),
        )

        # Act
        with patch('builtins.print') as mock_print:
            command.run()

        # Assert
        schema = Schema.create_from_data(json.loads((self.out / 'schema.json').read_text(encoding='utf-8')))
        self.assertEqual(schema, Schema.create_synthetic(15))
        dataset = load_csv(self.out / 'data.csv', schema)
        self.assertEqual(len(dataset), 200)
        self.assertEqual(int(dataset.labels.sum()), 10)
        mock_print.assert_called_once_with(f'Generated 200 rows (10 fraud) in {self.out}')

    def test_abort_removes_outputs(self) -> None:
        # Arrange
        command = GenerateCommand.create_from_arguments(
            _parse('--out', str(self.out), '--rows', '100', '--prevalence', '0.1', '--features', '15'),
        )
        with patch('builtins.print'):
            command.run()

        # Act
        command.abort()

        # Assert
        self.assertEqual(list(self.out.iterdir()), [])
