# pyright: strict

from spikefraud.errors import ConfigError, DimensionError, IngestionError, InputError, TrainingError
from test.test_case import TestCase


class TestErrorRecords(TestCase):

    def test_plain_error(self) -> None:
        # Act
        record = InputError('Budget must be >= 1, got 0').to_record()

        # Assert
        self.assertEqual(record, {'error': 'InputError', 'message': 'Budget must be >= 1, got 0'})

    def test_config_error_lists_violations(self) -> None:
        # Act
        record = ConfigError('run config', ['a', 'b']).to_record()

        # Assert
        self.assertEqual(record['message'], 'Invalid run config: a; b')
        self.assertEqual(record['violations'], ['a', 'b'])

    def test_ingestion_error_locates_the_value(self) -> None:
        # Act
        record = IngestionError(4, 'amount', 'abc', 'not a finite number').to_record()

        # Assert
        self.assertEqual(record['error'], 'IngestionError')
        self.assertEqual((record['row'], record['column'], record['value']), (4, 'amount', 'abc'))

    def test_dimension_and_training_details(self) -> None:
        # Act
        dimension = DimensionError('conv1d', 'channels', 1, 3).to_record()
        training = TrainingError(2, float('nan')).to_record()

        # Assert
        self.assertEqual((dimension['op'], dimension['expected'], dimension['actual']), ('conv1d', '1', '3'))
        self.assertEqual(training['loss'], 'nan')
