"""This module turns exceptions raised by a command into exit codes and error lines.

Functions:
    manage_cli_exception(error: Exception) -> int:
        Log the exception, print a machine readable line to stderr and return the code.
    describe_exception(error: Exception) -> str:
        The `error=<Class> message=<text>` line of an exception.
"""

import logging
import sys
import traceback

from src.controller.errors.exception_mapper import exit_code

logger = logging.getLogger(__name__)


def _one_line(text: str) -> str:
    return " ".join(text.split())


def _log_exception(error: Exception, code: int) -> None:
    exc_str = None
    try:
        exc_str = _one_line(f"{error}")
    except Exception:
        exc_str = _one_line(traceback.format_exc())
    logger.error("exit=%d %s: %s", code, type(error).__name__, exc_str)


def describe_exception(error: Exception) -> str:
    message = getattr(error, "message", None)
    if not isinstance(message, str):
        message = str(error)
    return f"error={type(error).__name__} message={_one_line(message)}"


def manage_cli_exception(error: Exception) -> int:
    """Report an exception that ended a command.

    Args:
        error (Exception): The exception.

    Returns:
        int: 2 for usage errors, 1 for domain and file errors.
    """
    code = exit_code(error)
    _log_exception(error, code)
    sys.stderr.write(describe_exception(error) + "\n")
    return code
