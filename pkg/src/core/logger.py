"""Logging for the command line.

Records go to a rotating file under `APP_LOG_FILE_PATH` and, from WARNING up, to a colored
stderr console. Every record carries the run id set through `asgi_correlation_id`, so the
rows of one batch can be told apart in the shared file. Stdout is left to the CSV output.
"""

import logging
import os
import shutil
import sys
from enum import Enum
from logging.handlers import RotatingFileHandler
from pathlib import Path

from asgi_correlation_id import CorrelationIdFilter

from src.core.config import settings

LOG_FORMAT = "%(asctime)s - [%(correlation_id)s] - %(name)s - %(funcName)s - %(levelname)s"
LOG_BACKUPS = 10
MAX_LOG_BYTES = 4 * 1024 * 1024 * 1024

# Libraries that log at INFO on import
QUIET_LOGGERS = ("numexpr", "numexpr.utils")


class LogLevelColor(Enum):
    """ANSI color of the console header per level."""

    DEBUG = "\033[94m"  # Blue
    INFO = "\033[92m"  # Green
    WARNING = "\033[93m"  # Yellow
    ERROR = "\033[91m"  # Red
    CRITICAL = "\033[91m\033[1m"  # Red + Bold


class ColoredConsoleFormatter(logging.Formatter):
    """Colors the header of a record by its level and leaves the message plain."""

    def __init__(self, datefmt: str | None = None) -> None:
        super().__init__(fmt=f"{LOG_FORMAT} - %(message)s", datefmt=datefmt)
        self.header_fmt = logging.Formatter(LOG_FORMAT, datefmt=datefmt)
        self.message_fmt = logging.Formatter("%(message)s", datefmt=datefmt)

    def format(self, record: logging.LogRecord) -> str:
        header = self.header_fmt.format(record)
        if record.levelname in LogLevelColor.__members__:
            header = f"{LogLevelColor[record.levelname].value}{header}\033[0m"
        return f"{header} - {self.message_fmt.format(record)}"


def log_file_path() -> Path:
    """The log file, created with its directory if missing.

    `APP_LOG_FILE_PATH` is read from the environment at call time, so tests can point
    each session at a temporary directory after the settings were loaded.
    """
    path = Path(os.getenv("APP_LOG_FILE_PATH", settings.APP_LOG_FILE_PATH)).resolve()
    path.parent.mkdir(parents=True, exist_ok=True)
    path.touch(exist_ok=True)
    return path


def _max_log_bytes(directory: Path) -> int:
    # 15% of the disk or 4GB, whichever is smaller
    return int(min(0.15 * shutil.disk_usage(directory).total, MAX_LOG_BYTES))


def setup_logging(*, console: bool = True) -> None:
    """Configure the root logger; calling it again replaces the previous handlers.

    Args:
        console (bool): Whether to attach the stderr console handler.
    """
    level = logging.DEBUG if settings.ENVIRONMENT in ["DEV", "PYTEST"] else logging.INFO
    cid_filter = CorrelationIdFilter(uuid_length=32)

    path = log_file_path()
    file_handler = RotatingFileHandler(
        str(path), maxBytes=_max_log_bytes(path.parent), backupCount=LOG_BACKUPS
    )
    file_handler.setFormatter(logging.Formatter(f"{LOG_FORMAT} - %(message)s"))
    file_handler.addFilter(cid_filter)

    root_logger = logging.getLogger()
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)
        if isinstance(handler, RotatingFileHandler):
            handler.close()
    root_logger.setLevel(level)
    root_logger.addHandler(file_handler)

    if console:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(ColoredConsoleFormatter())
        console_handler.addFilter(cid_filter)
        console_handler.setLevel(logging.WARNING)
        root_logger.addHandler(console_handler)

    # numpy RuntimeWarnings from the kernels end up in the log file
    logging.captureWarnings(True)
    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)
