"""Exception hierarchy shared by the tracking pipeline."""
from typing import Optional


class FactError(Exception):
    """Base class for all pipeline errors."""


class InvalidArgumentError(FactError, ValueError):
    """An operation was called with arguments that violate its preconditions."""


class NumericalFailureError(FactError, ArithmeticError):
    """A linear system could not be solved reliably."""

    def __init__(self, message: str, frame: Optional[int] = None):
        self.frame = frame
        if frame is not None:
            message = f"frame {frame}: {message}"
        super().__init__(message)

    def with_frame(self, frame: int) -> "NumericalFailureError":
        """Return a copy of this error tagged with a frame number."""
        if self.frame is not None:
            return self
        return type(self)(str(self), frame=frame)


class ParseError(FactError, ValueError):
    """A text or binary input file is malformed."""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = str(path)
        if line is not None:
            location = f"{location}:{line}" if location else f"line {line}"
        super().__init__(f"{location}: {message}" if location else message)


class EmbeddingFormatError(ParseError):
    """The binary embedding sidecar violates its format."""


class EmbeddingMagicError(EmbeddingFormatError):
    """The sidecar header carries the wrong magic or version."""


class TruncatedEmbeddingError(EmbeddingFormatError):
    """The sidecar payload ends before the declared record count."""


class EmbeddingCountMismatchError(EmbeddingFormatError):
    """A frame has a different number of embeddings than detections."""

    def __init__(self, message: str, frame: int, path: Optional[str] = None):
        self.frame = frame
        super().__init__(f"frame {frame}: {message}", path=path)
