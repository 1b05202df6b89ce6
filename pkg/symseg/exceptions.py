"""Exception hierarchy for symseg.

Lightweight exceptions without third-party dependencies.
Parsers translate decoding failures into these; batch layers
(sweep, CLI) catch SymsegError per file and keep going.
"""

from __future__ import annotations

from collections.abc import Iterable
from typing import Any


class SymsegError(Exception):
    """Base exception for symseg errors."""

    def __init__(self, message: str, source: str | None = None) -> None:
        super().__init__(message)
        self.source = source

    def __reduce__(self) -> tuple[Any, ...]:
        # Subclass __init__ signatures differ: rebuild from message and attributes.
        return (_rebuild, (type(self), str(self), dict(self.__dict__)))


def _rebuild(
    cls: type[SymsegError], message: str, state: dict[str, Any]
) -> SymsegError:
    error = cls.__new__(cls)
    Exception.__init__(error, message)
    error.__dict__.update(state)
    return error


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------


class ParseError(SymsegError):
    """Input file could not be turned into a Piece or annotation."""


class MalformedFileError(ParseError):
    """Bad chunk magic, truncated events or unreadable rows."""

    def __init__(
        self, message: str = "Malformed input file", source: str | None = None
    ) -> None:
        super().__init__(message, source=source)


class UnsupportedFormatError(ParseError):
    """Valid file in a flavour we do not handle (SMF format 2, SMPTE time)."""


class TempoChangeError(ParseError):
    """File contains more than one tempo."""

    def __init__(self, tempos: Iterable[int], source: str | None = None) -> None:
        self.tempos = tuple(tempos)
        super().__init__(
            f"Tempo changes are not supported: {list(self.tempos)}", source=source
        )


class MissingColumnError(ParseError):
    """A required CSV column is absent from the header row."""

    def __init__(self, column: str, source: str | None = None) -> None:
        super().__init__(f"Missing required column: {column}", source=source)
        self.column = column


class SpanOrderError(ParseError):
    """An annotated span does not start before it ends."""


# ---------------------------------------------------------------------------
# Piece model
# ---------------------------------------------------------------------------


class PieceError(SymsegError):
    """Invalid note data or note access."""


class InvalidNoteError(PieceError):
    """Note violates pitch, velocity or duration constraints."""


class IndexOutOfRangeError(PieceError, IndexError):
    """Note index outside [0, N)."""

    def __init__(self, index: int, size: int) -> None:
        super().__init__(f"Note index {index} out of range for {size} notes")
        self.index = index
        self.size = size


class TooFewNotesError(PieceError):
    """Operation needs more notes than the piece has."""

    def __init__(self, required: int, actual: int, source: str | None = None) -> None:
        super().__init__(
            f"At least {required} notes required, got {actual}", source=source
        )
        self.required = required
        self.actual = actual


# ---------------------------------------------------------------------------
# Graph
# ---------------------------------------------------------------------------


class GraphError(SymsegError):
    """Graph or matrix construction failure."""


class CapacityExceededError(GraphError):
    """Note count exceeds the quadratic-allocation limit."""

    def __init__(self, size: int, limit: int) -> None:
        super().__init__(f"{size} notes exceed the capacity limit of {limit}")
        self.size = size
        self.limit = limit


class MatrixTooSmallError(GraphError):
    """Novelty needs a square matrix with at least two rows."""


# ---------------------------------------------------------------------------
# Detection
# ---------------------------------------------------------------------------


class ChangepointError(SymsegError):
    """Changepoint detection failure."""


class EmptySegmentError(ChangepointError):
    """Segment bounds with a >= b."""

    def __init__(self, start: int, end: int) -> None:
        super().__init__(f"Empty segment [{start}, {end})")
        self.start = start
        self.end = end


class WindowTooLargeError(ChangepointError):
    """Sliding window does not fit in the signal."""

    def __init__(self, window: int, length: int) -> None:
        super().__init__(f"Window {window} too large for signal of length {length}")
        self.window = window
        self.length = length


class InvalidChangepointsError(ChangepointError):
    """Detector output violates ordering, gap or alignment rules."""


class TooFewCandidatesError(SymsegError):
    """Segment SSM needs at least two boundary candidates."""


class InvalidParamsError(SymsegError):
    """Method parameters missing or out of range."""


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


class EvaluationError(SymsegError):
    """Scoring failure."""


class UnpairedFileError(EvaluationError):
    """Annotations and estimates do not pair one-to-one."""

    def __init__(self, files: Iterable[str]) -> None:
        self.files = tuple(sorted(files))
        super().__init__(f"Unpaired files: {', '.join(self.files)}")


class EmptyTableError(EvaluationError):
    """Sweep table has no rows to choose from."""

    def __init__(self, message: str = "Sweep table is empty") -> None:
        super().__init__(message)


class ConfigError(SymsegError):
    """Configuration invalid or unknown keys present."""
