"""Maps exception classes to the exit codes of the command line."""

from pydantic import ValidationError

from src.controller.errors import exceptions
from src.repository import exceptions as repository_exceptions
from src.service import exceptions as service_exceptions

EXIT_OK = 0
EXIT_DOMAIN_ERROR = 1
EXIT_USAGE_ERROR = 2

EXCEPTION_MAPPER: dict[type[Exception], int] = {
    exceptions.UsageError: EXIT_USAGE_ERROR,
    ValidationError: EXIT_USAGE_ERROR,
    repository_exceptions.BaseExceptionError: EXIT_DOMAIN_ERROR,
    service_exceptions.BaseExceptionError: EXIT_DOMAIN_ERROR,
}


def exit_code(error: Exception) -> int:
    """Exit code of the closest mapped base class, 1 for anything unmapped."""
    for cls in type(error).__mro__:
        if cls in EXCEPTION_MAPPER:
            return EXCEPTION_MAPPER[cls]
    return EXIT_DOMAIN_ERROR
