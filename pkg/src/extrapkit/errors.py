"""Exception types shared across the toolkit."""


class InvalidInputError(ValueError):
    """Arguments violate an operation's preconditions."""


class FormatError(ValueError):
    """A file does not conform to its on-disk format."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)


class ContractViolation(RuntimeError):
    """A caller-supplied callback or prediction broke its contract."""
