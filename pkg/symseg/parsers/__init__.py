"""Ingestion and output codecs for symseg."""

from __future__ import annotations

from pathlib import Path

from ..const import CSV_SUFFIXES, DEFAULT_TICKS_PER_QUARTER, MIDI_SUFFIXES
from ..exceptions import MalformedFileError, UnsupportedFormatError
from ..models.note import Piece
from .annotations import (
    SpanPatch,
    load_annotation,
    load_span_patches,
    parse_boundary_csv,
    parse_boundary_json,
    parse_span_csv,
)
from .export import (
    read_segmentation,
    write_report,
    write_segmentation,
)
from .midi import parse_midi
from .note_csv import parse_note_csv, write_note_csv


def load_piece(
    path: Path, ticks_per_quarter: int = DEFAULT_TICKS_PER_QUARTER
) -> Piece:
    """Load a MIDI or note CSV file, dispatching on the suffix.

    ticks_per_quarter only applies to CSV input; MIDI files carry their
    own resolution.

    Raises:
        UnsupportedFormatError: Unknown suffix.
        MalformedFileError: File unreadable.
    """
    suffix = path.suffix.lower()
    source = str(path)
    try:
        if suffix in MIDI_SUFFIXES:
            return parse_midi(path.read_bytes(), source_path=source)
        if suffix in CSV_SUFFIXES:
            text = path.read_text(encoding="utf-8")
            return parse_note_csv(text, ticks_per_quarter, source_path=source)
    except (OSError, UnicodeDecodeError) as err:
        raise MalformedFileError(f"Unreadable file: {err}", source=source) from err
    raise UnsupportedFormatError(f"Unknown file type {suffix!r}", source=source)


__all__ = [
    "SpanPatch",
    "load_annotation",
    "load_piece",
    "load_span_patches",
    "parse_boundary_csv",
    "parse_boundary_json",
    "parse_midi",
    "parse_note_csv",
    "parse_span_csv",
    "read_segmentation",
    "write_note_csv",
    "write_report",
    "write_segmentation",
]
