# pyright: strict

from pathlib import Path
try:
    from typing import Self
except ImportError:  # Python < 3.11
    from typing_extensions import Self

from spikefraud.config.run_config import RunConfig
from spikefraud.utils.defaults import Defaults


class MockDefaults(Defaults):
    """
    Defaults with a fixed run config, independent of the environment.

    Patch the `Defaults` class with an instance; calling the instance
    returns itself.
    """

    def __init__(self, run_config: RunConfig | None = None) -> None:
        super().__init__()

        self._run_config = run_config or RunConfig(out=Path('/runs/default'))

    def get_run_config(self) -> RunConfig:
        return self._run_config

    def __call__(self) -> Self:
        return self
