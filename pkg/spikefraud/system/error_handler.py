# pyright: strict

import logging
from abc import ABC, abstractmethod
from enum import Enum, auto
from typing import Callable


logger = logging.getLogger(__name__)


class ErrorHandler(ABC):
    """
    Abstract base class for error handlers.

    An error handler tries to run a callable and handles or records errors
    that occur during the execution of the task according to a policy.
    """

    class Status(Enum):
        SUCCESS = auto()
        SKIPPED = auto()
        FAILED = auto()

    @abstractmethod
    def try_run(self, task: Callable[[], None]) -> Status:
        """
        Try to run the given function and handle any errors that occur.
        """
        pass  # pragma: no cover


class RecordingErrorHandler(ErrorHandler):
    """
    An error handler that logs and records selected errors instead of
    propagating them.

    Notes:
    - Only selected Exception types are caught, all others are propagated
    - `errors` keeps every caught exception in order; `last_error` is the
      one caught by the most recent failed run
    """

    def __init__(self, *exceptions: type[Exception]) -> None:
        super().__init__()

        self.exceptions = tuple(exceptions)
        self.errors: list[Exception] = []
        self.last_error: Exception | None = None

    def try_run(self, task: Callable[[], None]) -> ErrorHandler.Status:
        self.last_error = None
        try:
            task()
            return ErrorHandler.Status.SUCCESS
        except self.exceptions as e:
            logger.warning('Task failed: %s', e)
            self.errors.append(e)
            self.last_error = e
            return ErrorHandler.Status.FAILED
