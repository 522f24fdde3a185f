# pyright: strict

import os
from pathlib import Path
from unittest.mock import patch

from spikefraud.config.run_config import RunConfig
from spikefraud.utils.defaults import Defaults
from test.test_case import TestCase


class TestDefaults(TestCase):

    def test_out_from_environment(self) -> None:
        # Act
        with patch.dict(os.environ, {'SPIKEFRAUD_OUT': '/tmp/spikefraud-runs'}):
            config = Defaults().get_run_config()

        # Assert
        self.assertEqual(config.out, Path('/tmp/spikefraud-runs'))

    def test_builtin_run_config(self) -> None:
        # Act
        with patch.dict(os.environ, {}, clear=True):
            config = Defaults().get_run_config()

        # Assert
        self.assertEqual(config, RunConfig())

    def test_checkpoint_dir(self) -> None:
        # Act & Assert
        self.assertEqual(Defaults().get_checkpoint_dir(Path('/runs/a')), Path('/runs/a/checkpoint'))
