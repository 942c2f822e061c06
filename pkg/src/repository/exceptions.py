"""This module defines custom exception classes for errors while reading or writing files."""


class BaseExceptionError(Exception):
    """Base class for exceptions in this module."""

    def __init__(self, message: str = "An error occurred."):
        self.message = message

    def __str__(self):
        return repr(self.message)


class SurfaceFileNotFoundError(BaseExceptionError):
    """Raised when a surface, curve or experiment file does not exist."""


class MalformedFileError(BaseExceptionError):
    """Raised when a file is not valid `key: JSON` text or fails its schema."""
