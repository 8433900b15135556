class FragscanError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(FragscanError, ValueError):
    """An argument violates a documented precondition."""


class OutOfBoundsError(FragscanError, IndexError):
    """A byte range does not fit inside its buffer."""

    def __init__(self, offset: int, length: int, size: int):
        self.offset = offset
        self.length = length
        self.size = size
        super().__init__(
            f"range [offset={offset}, length={length}] exceeds buffer of size {size}"
        )


class EmptyCorpusError(FragscanError):
    """No files were available to analyse."""
