"""Note sequence models.

Frozen dataclasses for immutability - a parsed piece never changes and
is safe to share between worker processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from ..const import (
    DEFAULT_TEMPO_US_PER_QUARTER,
    DEFAULT_TIME_SIGNATURE,
    DEFAULT_VELOCITY,
)
from ..exceptions import IndexOutOfRangeError, InvalidNoteError

MIN_PITCH = 0
MAX_PITCH = 127
US_PER_SECOND = 1_000_000


@dataclass(frozen=True)
class Note:
    """A single note with integer tick timing."""

    pitch: int
    onset_ticks: int
    offset_ticks: int
    velocity: int = DEFAULT_VELOCITY
    track: int = 0

    def __post_init__(self) -> None:
        """Validate pitch, velocity and duration."""
        if not MIN_PITCH <= self.pitch <= MAX_PITCH:
            raise InvalidNoteError(f"Pitch {self.pitch} outside 0-127")
        if not 0 <= self.velocity <= 127:
            raise InvalidNoteError(f"Velocity {self.velocity} outside 0-127")
        if self.onset_ticks < 0:
            raise InvalidNoteError(f"Negative onset {self.onset_ticks}")
        if self.offset_ticks <= self.onset_ticks:
            raise InvalidNoteError(
                f"Offset {self.offset_ticks} not after onset {self.onset_ticks}"
            )

    @property
    def duration_ticks(self) -> int:
        """Length of the note in ticks."""
        return self.offset_ticks - self.onset_ticks


@dataclass(frozen=True)
class TimingContext:
    """Tick to beat to second conversion context.

    The beat is always the quarter note, whatever the time signature
    denominator: in 3/8 a bar lasts 1.5 beats.
    """

    ticks_per_quarter: int
    tempo_us_per_quarter: int = DEFAULT_TEMPO_US_PER_QUARTER
    time_signature: tuple[int, int] = DEFAULT_TIME_SIGNATURE

    def __post_init__(self) -> None:
        """Validate resolution, tempo and meter."""
        if self.ticks_per_quarter <= 0:
            raise InvalidNoteError("ticks_per_quarter must be positive")
        if self.tempo_us_per_quarter <= 0:
            raise InvalidNoteError("tempo must be positive")
        numerator, denominator = self.time_signature
        if numerator <= 0 or denominator <= 0:
            raise InvalidNoteError(f"Invalid time signature {self.time_signature}")

    def beats(self, ticks: int) -> Fraction:
        """Exact quarter-note beats for a tick position."""
        return Fraction(ticks, self.ticks_per_quarter)

    def seconds(self, ticks: int) -> Fraction:
        """Exact seconds for a tick position at the fixed tempo."""
        return self.beats(ticks) * Fraction(self.tempo_us_per_quarter, US_PER_SECOND)

    def ticks(self, beats: Fraction) -> int:
        """Nearest tick for a beat position."""
        return round(Fraction(beats) * self.ticks_per_quarter)

    @property
    def bar_length_beats(self) -> Fraction:
        """Bar length in quarter-note beats: numerator * 4 / denominator."""
        numerator, denominator = self.time_signature
        return Fraction(numerator * 4, denominator)


@dataclass(frozen=True)
class PieceMetadata:
    """Ingestion bookkeeping kept next to the notes."""

    unclosed_notes: int = 0
    dropped_notes: int = 0
    origin_beats: Fraction = Fraction(0)

    def as_dict(self) -> dict[str, Any]:
        """Serialize for JSON output."""
        return {
            "unclosed_notes": self.unclosed_notes,
            "dropped_notes": self.dropped_notes,
            "origin_beats": str(self.origin_beats),
        }


@dataclass(frozen=True)
class Piece:
    """Onset-sorted note sequence with its timing context.

    Use Piece.from_notes() to get the canonical (onset, pitch) order.
    """

    notes: tuple[Note, ...]
    timing: TimingContext
    source_path: str = ""
    metadata: PieceMetadata = field(default_factory=PieceMetadata)

    @classmethod
    def from_notes(
        cls,
        notes: list[Note] | tuple[Note, ...],
        timing: TimingContext,
        source_path: str = "",
        metadata: PieceMetadata | None = None,
    ) -> Piece:
        """Build a piece, sorting notes by (onset, pitch).

        Python's sort is stable, so notes sharing onset and pitch keep
        their input order.
        """
        ordered = tuple(sorted(notes, key=lambda n: (n.onset_ticks, n.pitch)))
        return cls(
            notes=ordered,
            timing=timing,
            source_path=source_path,
            metadata=metadata or PieceMetadata(),
        )

    @property
    def n_notes(self) -> int:
        """Number of notes N."""
        return len(self.notes)

    @property
    def onsets(self) -> np.ndarray:
        """Onset ticks as an int64 array."""
        return np.fromiter((n.onset_ticks for n in self.notes), dtype=np.int64)

    @property
    def offsets(self) -> np.ndarray:
        """Offset ticks as an int64 array."""
        return np.fromiter((n.offset_ticks for n in self.notes), dtype=np.int64)

    @property
    def pitches(self) -> np.ndarray:
        """MIDI pitches as an int64 array."""
        return np.fromiter((n.pitch for n in self.notes), dtype=np.int64)

    @property
    def end_ticks(self) -> int:
        """Latest note offset, 0 for an empty piece."""
        return max((n.offset_ticks for n in self.notes), default=0)

    @property
    def duration_beats(self) -> Fraction:
        """Piece length in beats, from tick 0 to the latest offset."""
        return self.timing.beats(self.end_ticks)

    def note_time(self, note_index: int) -> tuple[float, float]:
        """Onset of a note as (beats, seconds)."""
        return note_time(self, note_index)


def note_time(piece: Piece, note_index: int) -> tuple[float, float]:
    """Return the onset of a note in beats and seconds.

    Args:
        piece: Piece holding the note.
        note_index: Position in the onset-sorted note list.

    Returns:
        (beats, seconds) as floats; arithmetic is exact until conversion.

    Raises:
        IndexOutOfRangeError: If note_index is outside [0, N).
    """
    if not 0 <= note_index < piece.n_notes:
        raise IndexOutOfRangeError(note_index, piece.n_notes)
    ticks = piece.notes[note_index].onset_ticks
    return float(piece.timing.beats(ticks)), float(piece.timing.seconds(ticks))
