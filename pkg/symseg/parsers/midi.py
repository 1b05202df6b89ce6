"""Standard MIDI File ingestion.

Chunk and event decoding (running status, variable-length delta
times, meta events) is done by mido. This module pairs note-on and
note-off events into Notes, reads the single tempo and the first time
signature, and maps every decoding failure to a typed ParseError.
"""

from __future__ import annotations

import io
import logging
import struct
from dataclasses import dataclass, field

import mido

from ..const import DEFAULT_TEMPO_US_PER_QUARTER, DEFAULT_TIME_SIGNATURE
from ..exceptions import (
    InvalidNoteError,
    MalformedFileError,
    TempoChangeError,
    UnsupportedFormatError,
)
from ..models.note import Note, Piece, PieceMetadata, TimingContext

_LOGGER = logging.getLogger(__name__)

HEADER_MAGIC = b"MThd"
HEADER_STRUCT = struct.Struct(">4sLHHH")  # magic, length, format, ntrks, division
SMPTE_DIVISION_FLAG = 0x8000
SUPPORTED_FORMATS = (0, 1)


@dataclass
class _TrackNotes:
    """Note pairing state for one track."""

    track: int
    notes: list[Note] = field(default_factory=list)
    # (channel, pitch) -> FIFO of (onset_ticks, velocity)
    active: dict[tuple[int, int], list[tuple[int, int]]] = field(default_factory=dict)
    dropped: int = 0
    unclosed: int = 0

    def note_on(self, channel: int, pitch: int, tick: int, velocity: int) -> None:
        self.active.setdefault((channel, pitch), []).append((tick, velocity))

    def note_off(self, channel: int, pitch: int, tick: int) -> None:
        pending = self.active.get((channel, pitch))
        if not pending:
            return
        onset, velocity = pending.pop(0)
        self._close(pitch, onset, tick, velocity)

    def close_all(self, last_tick: int) -> None:
        """Close notes still sounding at the end of the track."""
        for (_, pitch), pending in sorted(self.active.items()):
            for onset, velocity in pending:
                self.unclosed += 1
                self._close(pitch, onset, last_tick, velocity)
        self.active.clear()

    def _close(self, pitch: int, onset: int, offset: int, velocity: int) -> None:
        if offset <= onset:
            self.dropped += 1
            return
        self.notes.append(
            Note(
                pitch=pitch,
                onset_ticks=onset,
                offset_ticks=offset,
                velocity=velocity,
                track=self.track,
            )
        )


def _check_header(data: bytes, source: str) -> None:
    """Validate the MThd chunk before handing the bytes to mido."""
    if len(data) < HEADER_STRUCT.size:
        raise MalformedFileError("File too short for an MThd header", source=source)
    magic, length, fmt, _, division = HEADER_STRUCT.unpack_from(data)
    if magic != HEADER_MAGIC:
        raise MalformedFileError("MThd chunk not found", source=source)
    if length < 6:
        raise MalformedFileError(f"Header chunk too short: {length}", source=source)
    if fmt not in SUPPORTED_FORMATS:
        raise UnsupportedFormatError(f"SMF format {fmt} not supported", source=source)
    if division & SMPTE_DIVISION_FLAG:
        raise UnsupportedFormatError("SMPTE time division not supported", source=source)
    if division == 0:
        raise MalformedFileError("Zero ticks per quarter note", source=source)


def _load(data: bytes, source: str) -> mido.MidiFile:
    try:
        return mido.MidiFile(file=io.BytesIO(data))
    except Exception as err:
        # mido raises OSError, EOFError, ValueError, KeyError... on bad input
        raise MalformedFileError(f"Unreadable MIDI data: {err}", source=source) from err


def parse_midi(data: bytes, source_path: str = "") -> Piece:
    """Parse a Standard MIDI File into an onset-sorted Piece.

    Notes from all tracks are merged. A note-on with velocity 0 is a
    note-off; overlapping notes of the same pitch and channel pair
    first-in first-out. Notes still sounding at the end of their track
    are closed at the track's last tick and counted in
    metadata.unclosed_notes.

    Args:
        data: Raw file bytes.
        source_path: Path recorded in the Piece and in errors.

    Returns:
        Piece with the file's resolution, tempo and first time signature.

    Raises:
        MalformedFileError: Bad chunk magic or truncated events.
        UnsupportedFormatError: SMF format 2 or SMPTE division.
        TempoChangeError: More than one distinct tempo in the file.
    """
    _check_header(data, source_path)
    midi = _load(data, source_path)

    tempos: list[tuple[int, int]] = []
    time_signatures: list[tuple[int, int, tuple[int, int]]] = []
    tracks: list[_TrackNotes] = []

    for track_index, track in enumerate(midi.tracks):
        state = _TrackNotes(track=track_index)
        tick = 0
        for msg in track:
            tick += msg.time
            if msg.type == "note_on" and msg.velocity > 0:
                state.note_on(msg.channel, msg.note, tick, msg.velocity)
            elif msg.type in ("note_off", "note_on"):
                state.note_off(msg.channel, msg.note, tick)
            elif msg.type == "set_tempo":
                tempos.append((tick, msg.tempo))
            elif msg.type == "time_signature":
                time_signatures.append(
                    (tick, track_index, (msg.numerator, msg.denominator))
                )
        state.close_all(tick)
        tracks.append(state)

    distinct_tempos = sorted({value for _, value in tempos})
    if len(distinct_tempos) > 1:
        raise TempoChangeError(distinct_tempos, source=source_path)

    tempo = min(tempos)[1] if tempos else DEFAULT_TEMPO_US_PER_QUARTER
    time_signature = (
        min(time_signatures)[2] if time_signatures else DEFAULT_TIME_SIGNATURE
    )
    try:
        timing = TimingContext(
            ticks_per_quarter=midi.ticks_per_beat,
            tempo_us_per_quarter=tempo,
            time_signature=time_signature,
        )
    except InvalidNoteError as err:
        raise MalformedFileError(str(err), source=source_path) from err

    notes = [note for state in tracks for note in state.notes]
    metadata = PieceMetadata(
        unclosed_notes=sum(state.unclosed for state in tracks),
        dropped_notes=sum(state.dropped for state in tracks),
    )
    if metadata.unclosed_notes:
        _LOGGER.warning(
            "%s: closed %d unmatched note-on events at end of track",
            source_path or "<bytes>",
            metadata.unclosed_notes,
        )
    _LOGGER.debug(
        "Parsed %s: %d notes, %d tracks, tpq=%d, tempo=%d, meter=%s",
        source_path or "<bytes>",
        len(notes),
        len(tracks),
        timing.ticks_per_quarter,
        timing.tempo_us_per_quarter,
        timing.time_signature,
    )
    return Piece.from_notes(notes, timing, source_path=source_path, metadata=metadata)
