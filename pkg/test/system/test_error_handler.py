# pyright: strict

from spikefraud.errors import InputError, TrialError
from spikefraud.system.error_handler import ErrorHandler, RecordingErrorHandler
from test.test_case import TestCase


class TestRecordingErrorHandler(TestCase):

    def test_success(self) -> None:
        # Arrange
        handler = RecordingErrorHandler(TrialError)
        calls: list[int] = []

        # Act
        status = handler.try_run(lambda: calls.append(1))

        # Assert
        self.assertIs(status, ErrorHandler.Status.SUCCESS)
        self.assertEqual(calls, [1])
        self.assertIsNone(handler.last_error)

    def test_selected_errors_are_recorded(self) -> None:
        # Arrange
        handler = RecordingErrorHandler(TrialError)
        error = TrialError('diverged')

        def task() -> None:
            raise error

        # Act
        with self.assertLogs('spikefraud.system.error_handler', level='WARNING') as logs:
            status = handler.try_run(task)

        # Assert
        self.assertIs(status, ErrorHandler.Status.FAILED)
        self.assertIs(handler.last_error, error)
        self.assertEqual(handler.errors, [error])
        self.assertIn('diverged', logs.output[0])

    def test_last_error_is_reset_by_a_success(self) -> None:
        # Arrange
        handler = RecordingErrorHandler(TrialError)

        def task() -> None:
            raise TrialError('diverged')

        with self.assertLogs('spikefraud.system.error_handler', level='WARNING'):
            handler.try_run(task)

        # Act
        handler.try_run(lambda: None)

        # Assert
        self.assertIsNone(handler.last_error)
        self.assertEqual(len(handler.errors), 1)

    def test_other_errors_propagate(self) -> None:
        # Arrange
        handler = RecordingErrorHandler(TrialError)

        def task() -> None:
            raise InputError('bad')

        # Act & Assert
        with self.assertRaises(InputError):
            handler.try_run(task)
        self.assertEqual(handler.errors, [])
