#!/usr/bin/env python3
# pyright: strict
import sys
import os
import logging

from argparse import ArgumentParser
from typing import Any, Sequence, Type
from pathlib import Path


# Add the parent directory of this file to the Python path to enable imports
current_script_path = Path(os.path.abspath(__file__))
project_root_directory = current_script_path.parent.parent
sys.path.append(str(project_root_directory))

if True:  # prevent formatter from re-ordering these imports
    from spikefraud.commands.command import Command
    from spikefraud.commands.evaluate_command import EvaluateCommand
    from spikefraud.commands.explain_command import ExplainCommand
    from spikefraud.commands.generate_command import GenerateCommand
    from spikefraud.commands.optimize_command import OptimizeCommand
    from spikefraud.commands.train_command import TrainCommand
    from spikefraud.config.serialization import JsonSerializer
    from spikefraud.errors import SpikeFraudError

"""
This is the entry point for the spiking fraud detector. It parses the command
line arguments, initializes the commands and runs the command.

run `cli.py --help` for instructions
"""

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s | %(levelname)s | %(name)s | %(message)s'
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')

COMMANDS: dict[str, Type[Command]] = {
    GenerateCommand.get_name(): GenerateCommand,
    TrainCommand.get_name(): TrainCommand,
    OptimizeCommand.get_name(): OptimizeCommand,
    EvaluateCommand.get_name(): EvaluateCommand,
    ExplainCommand.get_name(): ExplainCommand,
}


def create_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog='spikefraud',
        description='Train, tune, evaluate and explain spiking neural network fraud detectors.',
    )
    parser.add_argument(
        '--log-level',
        choices=LOG_LEVELS,
        default='INFO',
        help='log messages of at least this level to stderr',
    )
    subparsers = parser.add_subparsers(
        help='available commands',
        dest='command',
    )

    for commandCls in COMMANDS.values():
        subparser = commandCls.get_subparser(subparsers)
        commandCls.add_arguments(subparser)

    return parser


def report_error(record: dict[str, Any]) -> None:
    sys.stderr.write(JsonSerializer().get_serialized_data(record))


def main(argv: Sequence[str] | None = None) -> int:
    """
    Run one command.

    Returns:
        int: 0 on success, 1 when the command failed, with an error record
        written to stderr. Usage errors exit with status 2 from argparse.
    """

    parser = create_parser()
    parsed_args = parser.parse_args(argv)

    logging.basicConfig(
        level=parsed_args.log_level,
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )

    commands_name = parsed_args.command

    if commands_name is None:
        parser.print_help()
        return 0

    command: Command | None = None
    try:
        command = COMMANDS[commands_name].create_from_arguments(parsed_args)
        command.run()
    except SpikeFraudError as e:
        report_error(e.to_record())
        if command is not None:
            command.abort()
        return 1
    except Exception as e:
        logger.debug('Unexpected error', exc_info=True)
        report_error({'error': type(e).__name__, 'message': str(e)})
        if command is not None:
            command.abort()
        return 1

    return 0


if __name__ == '__main__':
    sys.exit(main())
