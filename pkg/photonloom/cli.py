"""
Command-line entry point.

    simulate.py <command> [options]

Exit codes: 0 on success, 2 for usage and configuration errors, 1 when the
engine rejects a state it built itself or an internal invariant (a probability
ledger, an oracle comparison) fails.
"""
import argparse
import logging.config
import sys

import structlog

from . import settings
from .commands import COMMANDS
from .commands.base import ENGINE_ERRORS, CommandError, common_parser
from .config import ConfigError

logger = structlog.get_logger()


def build_parser(stdout=None):
    parser = argparse.ArgumentParser(
        prog="simulate.py",
        description="Heralded GHZ and W state generation with atom-cavity emitters",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    subparsers.required = True

    parent = common_parser()
    for name, command_class in COMMANDS.items():
        command = command_class(stdout=stdout)
        subparser = subparsers.add_parser(
            name, parents=[parent], help=command.help, description=command.help
        )
        command.add_arguments(subparser)
        subparser.set_defaults(command_instance=command)
    return parser


def configure_logging():
    logging.config.dictConfig(settings.LOGGING)


def main(argv=None, stdout=None):
    parser = build_parser(stdout)
    try:
        options = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 after --help
        return e.code

    try:
        options.command_instance.execute(options)
    except (ConfigError, CommandError) as e:
        print(f"{parser.prog} {options.command}: error: {e}", file=sys.stderr)
        return e.returncode
    except ENGINE_ERRORS as e:
        logger.error(
            "Engine Failed",
            command=options.command,
            error_type=type(e).__name__,
            error=str(e),
        )
        return 1
    except ValueError as e:
        print(f"{parser.prog} {options.command}: error: {e}", file=sys.stderr)
        return 2
    except AssertionError as e:
        logger.error("Invariant Violated", command=options.command, error=str(e))
        return 1
    return 0


def run():
    configure_logging()
    sys.exit(main())
