"""Exceptions for the command line."""


class BaseCLIError(Exception):
    """Base command line error."""

    def __init__(self: "BaseCLIError", message: str = "") -> None:
        """Initialize BaseCLIError."""
        self.message = message
        super().__init__(self.message)

    def __str__(self: "BaseCLIError") -> str:
        """Return string representation of the error."""
        return self.message


class UsageError(BaseCLIError):
    """Unknown command, bad flag or parameter outside its range."""

    def __init__(
        self: "UsageError",
        message: str = "The command line is incorrect: check the command and its flags.",
    ) -> None:
        """Initialize UsageError."""
        self.message = message
        super().__init__(self.message)
