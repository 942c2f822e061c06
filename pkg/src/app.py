"""Command line entry point.

Usage:
    python -m src.app <command> [flags]

Results are printed to stdout as CSV (or a one line summary for `intersect`); logs go to
the rotating log file and, from WARNING up, to stderr. Exit status is 0 on success, 1 on
domain or file errors and 2 on usage errors.
"""

import logging
import sys
from uuid import uuid4

from asgi_correlation_id import correlation_id

from src.controller.cli import COMMANDS, build_parser
from src.controller.errors.exception_manager import manage_cli_exception
from src.controller.errors.exception_mapper import EXIT_OK
from src.core.config import settings
from src.core.logger import setup_logging
from src.repository.files import write_csv

logger = logging.getLogger(__name__)


def run_command(argv: list[str] | None = None) -> str:
    """Parse, validate and run one command.

    Returns:
        str: The text for stdout, empty when the CSV went to --output.
    """
    namespace = build_parser().parse_args(argv)
    command = COMMANDS[namespace.command]
    values = {key: value for key, value in vars(namespace).items() if key != "command"}
    params = command.params.model_validate(values)
    logger.info("Running '%s' with %s", command.name, params.model_dump())
    result = command.handler(params)
    if command.to_text is not None and params.output is None:
        return command.to_text(result) + "\n"
    text = write_csv(command.to_frame(result), params.output)
    return "" if params.output else text


def main(argv: list[str] | None = None) -> int:
    setup_logging()
    correlation_id.set(uuid4().hex)
    logger.info("%s started in %s", settings.PROJECT_NAME, settings.ENVIRONMENT)
    try:
        text = run_command(argv)
    except Exception as error:
        return manage_cli_exception(error)
    sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
