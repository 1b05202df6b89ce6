"""Note-list CSV ingestion and serialization.

Two layouts are read:

* a header row naming the columns (``onset`` and ``pitch`` required,
  ``duration``, ``offset``, ``velocity`` and ``track`` optional);
* headerless numeric rows in the BPS column order
  (onset, midi pitch, morphetic pitch, duration, staff, measure).

Beat values are parsed as exact fractions ("1.5", "3/2", "-1") and only
rounded once, when converted to ticks.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import TextIO

from ..const import (
    DEFAULT_CSV_DURATION_BEATS,
    DEFAULT_TICKS_PER_QUARTER,
    DEFAULT_VELOCITY,
)
from ..exceptions import InvalidNoteError, MalformedFileError, MissingColumnError
from ..models.note import Note, Piece, PieceMetadata, TimingContext

_LOGGER = logging.getLogger(__name__)

COL_ONSET = "onset"
COL_PITCH = "pitch"
COL_DURATION = "duration"
COL_OFFSET = "offset"
COL_VELOCITY = "velocity"
COL_TRACK = "track"

REQUIRED_COLUMNS = (COL_ONSET, COL_PITCH)

# Headerless BPS note files
BPS_COLUMNS = (
    COL_ONSET,
    COL_PITCH,
    "morphetic_pitch",
    COL_DURATION,
    "staff",
    "measure",
)

WRITE_COLUMNS = (COL_ONSET, COL_OFFSET, COL_PITCH, COL_VELOCITY, COL_TRACK)


@dataclass(frozen=True)
class _Row:
    """One note row in beats, before tick conversion."""

    onset: Fraction
    offset: Fraction
    pitch: int
    velocity: int
    track: int


def _fraction(value: str, column: str, line: int, source: str) -> Fraction:
    try:
        return Fraction(value.strip())
    except (ValueError, ZeroDivisionError) as err:
        raise MalformedFileError(
            f"Line {line}: bad {column} value {value!r}", source=source
        ) from err


def _integer(value: str, column: str, line: int, source: str) -> int:
    number = _fraction(value, column, line, source)
    if number.denominator != 1:
        raise MalformedFileError(
            f"Line {line}: {column} must be an integer, got {value!r}", source=source
        )
    return int(number)


def _is_numeric_row(row: list[str]) -> bool:
    try:
        for value in row:
            Fraction(value.strip())
    except (ValueError, ZeroDivisionError):
        return False
    return bool(row)


def _read_rows(
    stream: TextIO, source: str
) -> tuple[list[str], list[tuple[int, list[str]]]]:
    """Split the stream into column names and numbered data rows."""
    reader = csv.reader(stream)
    rows = [
        (reader.line_num, row) for row in reader if any(cell.strip() for cell in row)
    ]
    if not rows:
        return list(REQUIRED_COLUMNS), []

    first = rows[0][1]
    if _is_numeric_row(first):
        _LOGGER.debug("%s: headerless note CSV, using BPS column order", source)
        columns = list(BPS_COLUMNS[: len(first)])
    else:
        columns = [name.strip().lower() for name in first]
        rows = rows[1:]

    for required in REQUIRED_COLUMNS:
        if required not in columns:
            raise MissingColumnError(required, source=source)
    return columns, rows


def _parse_row(columns: list[str], line: int, row: list[str], source: str) -> _Row:
    if len(row) < len(columns):
        raise MalformedFileError(
            f"Line {line}: expected {len(columns)} fields, got {len(row)}",
            source=source,
        )
    cells = dict(zip(columns, row))

    onset = _fraction(cells[COL_ONSET], COL_ONSET, line, source)
    if cells.get(COL_OFFSET, "").strip():
        offset = _fraction(cells[COL_OFFSET], COL_OFFSET, line, source)
    elif cells.get(COL_DURATION, "").strip():
        offset = onset + _fraction(cells[COL_DURATION], COL_DURATION, line, source)
    else:
        offset = onset + DEFAULT_CSV_DURATION_BEATS

    velocity = DEFAULT_VELOCITY
    if cells.get(COL_VELOCITY, "").strip():
        velocity = _integer(cells[COL_VELOCITY], COL_VELOCITY, line, source)

    track = 0
    track_cell = cells.get(COL_TRACK) or cells.get("staff") or ""
    if track_cell.strip():
        track = _integer(track_cell, COL_TRACK, line, source)

    return _Row(
        onset=onset,
        offset=offset,
        pitch=_integer(cells[COL_PITCH], COL_PITCH, line, source),
        velocity=velocity,
        track=track,
    )


def parse_note_csv(
    text: str | TextIO,
    ticks_per_quarter: int = DEFAULT_TICKS_PER_QUARTER,
    source_path: str = "",
) -> Piece:
    """Parse a note-list CSV into an onset-sorted Piece.

    Rows whose offset does not come after the onset, once both are
    rounded to ticks, are dropped and counted in metadata.dropped_notes.
    If the earliest onset is negative (an anacrusis) every note is
    shifted so the piece starts at tick 0; the shift is kept in
    metadata.origin_beats.

    Args:
        text: CSV content or an open text stream.
        ticks_per_quarter: Resolution used for beat to tick conversion.
        source_path: Path recorded in the Piece and in errors.

    Raises:
        MissingColumnError: No onset or pitch column, in the header or in
            the width of headerless rows.
        MalformedFileError: Unparseable values or short rows.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    try:
        columns, numbered = _read_rows(stream, source_path)
    except csv.Error as err:
        raise MalformedFileError(f"Unreadable CSV: {err}", source=source_path) from err

    rows = [_parse_row(columns, line, row, source_path) for line, row in numbered]

    origin = min((row.onset for row in rows), default=Fraction(0))
    origin = min(origin, Fraction(0))
    if origin < 0:
        _LOGGER.debug("%s: shifting onsets by %s beats", source_path, -origin)

    try:
        timing = TimingContext(ticks_per_quarter=ticks_per_quarter)
    except InvalidNoteError as err:
        raise MalformedFileError(str(err), source=source_path) from err

    notes: list[Note] = []
    dropped = 0
    for row in rows:
        onset_ticks = timing.ticks(row.onset - origin)
        offset_ticks = timing.ticks(row.offset - origin)
        if offset_ticks <= onset_ticks:
            dropped += 1
            continue
        try:
            notes.append(
                Note(
                    pitch=row.pitch,
                    onset_ticks=onset_ticks,
                    offset_ticks=offset_ticks,
                    velocity=row.velocity,
                    track=row.track,
                )
            )
        except InvalidNoteError as err:
            raise MalformedFileError(str(err), source=source_path) from err

    if dropped:
        _LOGGER.warning(
            "%s: dropped %d rows with non-positive duration",
            source_path or "<text>",
            dropped,
        )

    metadata = PieceMetadata(dropped_notes=dropped, origin_beats=origin)
    return Piece.from_notes(notes, timing, source_path=source_path, metadata=metadata)


def write_note_csv(piece: Piece) -> str:
    """Serialize a piece as a headed note CSV in exact fractional beats.

    Parsing the output with the piece's ticks_per_quarter gives back
    the same note list.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(WRITE_COLUMNS)
    for note in piece.notes:
        writer.writerow(
            [
                str(piece.timing.beats(note.onset_ticks)),
                str(piece.timing.beats(note.offset_ticks)),
                note.pitch,
                note.velocity,
                note.track,
            ]
        )
    return buffer.getvalue()
