# pyright: strict

import os
from pathlib import Path

from spikefraud.config.run_config import RunConfig
from spikefraud.data.schema import Schema
from spikefraud.search.space import DEFAULT_HYPER_CONFIG, HyperConfig


class Defaults:
    """
    Provide default values for various configurable arguments

    Note that these defaults are not always static and may be computed from
    things like environment variables.
    """

    def get_run_config(self) -> RunConfig:
        """
        Built-in run settings, with the output directory taken from
        `SPIKEFRAUD_OUT` when it is set.
        """

        out = os.environ.get('SPIKEFRAUD_OUT')
        if out:
            return RunConfig(out=Path(out).expanduser())

        return RunConfig()

    def get_hyper_config(self) -> HyperConfig:
        """Neuron dynamics and optimizer settings used without a searched config."""

        return DEFAULT_HYPER_CONFIG

    def get_schema(self) -> Schema:
        """The Bank Account Fraud column layout."""

        return Schema.create_baf()

    def get_checkpoint_dir(self, out: Path) -> Path:
        return out / 'checkpoint'
