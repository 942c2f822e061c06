"""Command line parser."""

import argparse
from typing import NoReturn

from src.controller.cli.commands import COMMANDS
from src.controller.cli.commands.base import add_arguments
from src.controller.errors.exceptions import UsageError
from src.core.config import settings


class CliParser(argparse.ArgumentParser):
    """Argument parser that raises UsageError instead of exiting."""

    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> CliParser:
    parser = CliParser(prog=settings.PROJECT_NAME, description=settings.PROJECT_DESCRIPTION)
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="command")
    for command in COMMANDS.values():
        subparser = subparsers.add_parser(command.name, help=command.help)
        add_arguments(subparser, command.params)
    return parser
