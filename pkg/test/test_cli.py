# pyright: strict

import io
import json
import os
import tempfile
import unittest
from pathlib import Path
from typing import Any
from unittest.mock import MagicMock, patch

import pandas as pd

from spikefraud.cli import create_parser, main
from test.test_case import TestCase


SMALL_MODEL = ['--population', '4', '--timesteps', '2', '--epochs', '1', '--batch', '64']


class TestCli(TestCase):
    """Runs the commands end to end on a small generated data set."""

    def setUp(self) -> None:
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.root = Path(directory.name)
        self.data = self.root / 'data'

        exit_code = self._main(
            'generate', '--out', str(self.data), '--rows', '400', '--prevalence', '0.05', '--features', '15', '--seed', '1',
        )
        self.assertEqual(exit_code, 0)

    def _main(self, *argv: str) -> int:
        with patch('builtins.print'):
            return main(list(argv))

    def _data_args(self) -> list[str]:
        return ['--data', str(self.data / 'data.csv'), '--schema', str(self.data / 'schema.json')]

    def _read_json(self, path: Path) -> dict[str, Any]:
        return json.loads(path.read_text(encoding='utf-8'))

    def test_train_evaluate_explain(self) -> None:
        # Arrange
        out = self.root / 'train'

        # Act
        trained = self._main('train', *self._data_args(), '--out', str(out), *SMALL_MODEL)
        evaluated = self._main('evaluate', *self._data_args(), '--out', str(out))
        explained = self._main('explain', *self._data_args(), '--out', str(out), '--samples', '0,1,2')

        # Assert
        self.assertEqual((trained, evaluated, explained), (0, 0, 0))

        report = self._read_json(out / 'report.json')
        evaluation = self._read_json(out / 'evaluation.json')
        self.assertEqual(report['param_count'], 96 + 8320 + 65792 + 1028)
        self.assertEqual(evaluation['threshold'], report['threshold'])
        self.assertEqual(evaluation['test'], report['test'])
        self.assertIn('pe_age', evaluation['test'])

        history = pd.read_csv(out / 'history.csv')
        self.assertEqual(list(history['epoch']), [0])

        explanations = json.loads((out / 'explanations.json').read_text(encoding='utf-8'))
        self.assertEqual([record['index'] for record in explanations], [0, 1, 2])
        importance = pd.read_csv(out / 'importance.csv')
        self.assertEqual(len(importance), 15)
        self.assertTrue((out / 'checkpoint' / 'manifest.json').is_file())

    def test_optimize(self) -> None:
        # Arrange
        out = self.root / 'optimize'

        # Act
        exit_code = self._main('optimize', *self._data_args(), '--out', str(out), '--budget', '1', *SMALL_MODEL)

        # Assert
        self.assertEqual(exit_code, 0)
        trials = pd.read_csv(out / 'trials.csv')
        self.assertEqual(list(trials['trial']), [0, 1])
        best = self._read_json(out / 'best_config.json')
        self.assertEqual(len(best), 13)
        q_table = self._read_json(out / 'q_table.json')
        self.assertEqual((q_table['states'], q_table['actions']), (5, 10))
        self.assertTrue((out / 'checkpoint' / 'params.f32').is_file())

    def test_same_seed_gives_identical_reports(self) -> None:
        # Arrange
        outputs = [self.root / 'first', self.root / 'second']

        # Act
        for out in outputs:
            trained = self._main('train', *self._data_args(), '--out', str(out / 'train'), *SMALL_MODEL)
            optimized = self._main(
                'optimize', *self._data_args(), '--out', str(out / 'optimize'), '--budget', '1', *SMALL_MODEL,
            )
            self.assertEqual((trained, optimized), (0, 0))

        # Assert
        for name in ('train/report.json', 'optimize/report.json', 'optimize/trials.csv', 'optimize/best_config.json'):
            with self.subTest(file=name):
                self.assertEqual((outputs[0] / name).read_bytes(), (outputs[1] / name).read_bytes())
        self.assertEqual(
            (outputs[0] / 'train' / 'checkpoint' / 'params.f32').read_bytes(),
            (outputs[1] / 'train' / 'checkpoint' / 'params.f32').read_bytes(),
        )

    def test_failed_command_reports_json(self) -> None:
        # Arrange
        stderr = io.StringIO()

        # Act
        with patch('sys.stderr', stderr):
            exit_code = self._main(
                '--log-level', 'ERROR', 'train', '--data', str(self.root / 'absent.csv'), '--out', str(self.root / 'x'),
            )

        # Assert
        self.assertEqual(exit_code, 1)
        record = json.loads(stderr.getvalue())
        self.assertEqual(record['error'], 'InputError')
        self.assertIn('absent.csv', record['message'])
        self.assertFalse((self.root / 'x').exists())

    @patch('spikefraud.commands.train_command.TrainCommand.abort')
    @patch('spikefraud.commands.train_command.TrainCommand.run')
    def test_unexpected_error_reports_json(self, mock_run: MagicMock, mock_abort: MagicMock) -> None:
        # Arrange
        mock_run.side_effect = ValueError('bad value')
        stderr = io.StringIO()

        # Act
        with patch('sys.stderr', stderr):
            exit_code = self._main('--log-level', 'ERROR', 'train', *self._data_args(), '--out', str(self.root / 'y'))

        # Assert
        self.assertEqual(exit_code, 1)
        self.assertEqual(json.loads(stderr.getvalue()), {'error': 'ValueError', 'message': 'bad value'})
        mock_abort.assert_called_once_with()

    def test_malformed_schema_reports_json(self) -> None:
        # Arrange
        schema_path = self.root / 'bad_schema.json'
        schema_path.write_text(
            '{"label_column": "fraud_bool", "month_column": "month", '
            + '"feature_columns": ["a"], "categorical_columns": {"a": {"x": "one"}}}',
            encoding='utf-8',
        )
        stderr = io.StringIO()

        # Act
        with patch('sys.stderr', stderr):
            exit_code = self._main(
                '--log-level', 'ERROR', 'train',
                '--data', str(self.data / 'data.csv'),
                '--schema', str(schema_path),
                '--out', str(self.root / 'z'),
            )

        # Assert
        self.assertEqual(exit_code, 1)
        self.assertEqual(json.loads(stderr.getvalue())['error'], 'SchemaError')

    def test_usage_error_exits_with_2(self) -> None:
        # Act & Assert
        with patch('sys.stderr', io.StringIO()):
            with self.assertRaises(SystemExit) as context:
                self._main('train', '--epochs', 'many')
        self.assertEqual(context.exception.code, 2)

    def test_log_level_defaults_to_info(self) -> None:
        # Act
        parsed = create_parser().parse_args(['generate'])

        # Assert
        self.assertEqual(parsed.log_level, 'INFO')

    def test_no_command_prints_help(self) -> None:
        # Act
        with patch('sys.stdout', io.StringIO()) as stdout:
            exit_code = main([])

        # Assert
        self.assertEqual(exit_code, 0)
        self.assertIn('generate', stdout.getvalue())


@unittest.skipUnless(os.environ.get('SPIKEFRAUD_SLOW_TESTS') == '1', 'set SPIKEFRAUD_SLOW_TESTS=1 to run')
class TestCliEndToEnd(TestCase):
    """Full sized model on a full sized synthetic data set."""

    def setUp(self) -> None:
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.root = Path(directory.name)

    def _run(self, name: str, planted: str) -> tuple[Path, Path]:
        data = self.root / name / 'data'
        out = self.root / name / 'train'
        data_args = ['--data', str(data / 'data.csv'), '--schema', str(data / 'schema.json')]

        with patch('builtins.print'):
            generated = main([
                'generate', '--out', str(data), '--rows', '20000', '--features', '30',
                '--prevalence', '0.011', '--planted', planted, '--seed', '0',
            ])
            trained = main([
                'train', *data_args, '--out', str(out),
                '--population', '20', '--timesteps', '20', '--epochs', '15', '--seed', '0',
            ])
        self.assertEqual((generated, trained), (0, 0))

        return data, out

    def test_planted_signal_is_found_and_explained(self) -> None:
        # Arrange
        data, out = self._run('planted', '0,1,2,3,4')
        frame = pd.read_csv(data / 'data.csv')
        fraud_rows = frame.index[frame['fraud_bool'] == 1][:200].tolist()

        # Act
        with patch('builtins.print'):
            explained = main([
                'explain',
                '--data', str(data / 'data.csv'),
                '--schema', str(data / 'schema.json'),
                '--out', str(out),
                '--samples', ','.join(str(i) for i in fraud_rows),
            ])

        # Assert
        self.assertEqual(explained, 0)
        report = json.loads((out / 'report.json').read_text(encoding='utf-8'))
        self.assertLessEqual(report['target_fpr'], 0.05)
        self.assertGreaterEqual(report['test']['recall'], 0.5)
        self.assertGreaterEqual(report['test']['pe_age'], 0.8)

        importance = pd.read_csv(out / 'importance.csv').sort_values('importance', ascending=False)
        top = set(importance['feature'].head(5))
        planted = {f'feature_{i:02d}' for i in range(5)}
        self.assertGreaterEqual(len(top & planted), 3)

        explanations = json.loads((out / 'explanations.json').read_text(encoding='utf-8'))
        for record in explanations:
            half = len(record['spike_activity']) // 2
            self.assertEqual(
                record['class_activity'],
                [sum(record['spike_activity'][:half]), sum(record['spike_activity'][half:])],
            )

    def test_no_signal_scores_like_chance(self) -> None:
        # Arrange & Act
        _, out = self._run('silent', '')

        # Assert
        report = json.loads((out / 'report.json').read_text(encoding='utf-8'))
        self.assertLess(abs(report['test']['roc_auc'] - 0.5), 0.1)
