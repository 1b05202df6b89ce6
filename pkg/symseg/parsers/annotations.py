"""Reference boundary annotation loaders.

Three layouts are accepted, all in quarter-note beats:

* boundary CSV with columns ``boundary_beat`` and optional ``level``;
* JSON ``{"source": ..., "levels": {"mid": [beats...], ...}}``;
* span CSV with columns ``start_beat``, ``end_beat`` and optional
  ``level``, one row per annotated segment. A JSON patch file of
  ``{"row", "field", "old", "new"}`` corrections can be applied before
  the spans are converted to boundaries.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

from ..exceptions import MalformedFileError, MissingColumnError, SpanOrderError
from ..models.evaluation import Annotation, Level

_LOGGER = logging.getLogger(__name__)

COL_BOUNDARY = "boundary_beat"
COL_START = "start_beat"
COL_END = "end_beat"
COL_LEVEL = "level"


@dataclass(frozen=True)
class SpanPatch:
    """Correction of one field of one span row (0-based data row).

    A patch with a source applies only to the annotation file of that
    stem; without one it applies to every file it is given.
    """

    row: int
    field: str
    old: Fraction
    new: Fraction
    source: str | None = None

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> SpanPatch:
        """Create from a patch file entry."""
        try:
            return cls(
                row=int(data["row"]),
                field=str(data["field"]),
                old=Fraction(str(data["old"])),
                new=Fraction(str(data["new"])),
                source=str(data["source"]) if "source" in data else None,
            )
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as err:
            raise MalformedFileError(f"Bad patch entry {data!r}") from err


def _beat(value: str, line: int, source: str) -> Fraction:
    try:
        return Fraction(value.strip())
    except (ValueError, ZeroDivisionError) as err:
        raise MalformedFileError(
            f"Line {line}: bad beat value {value!r}", source=source
        ) from err


def _read_table(text: str, source: str) -> tuple[list[str], list[list[str]]]:
    try:
        rows = [row for row in csv.reader(io.StringIO(text)) if row]
    except csv.Error as err:
        raise MalformedFileError(f"Unreadable CSV: {err}", source=source) from err
    if not rows:
        raise MalformedFileError("Empty annotation file", source=source)
    header = [name.strip().lower() for name in rows[0]]
    return header, rows[1:]


def _level_matches(cells: dict[str, str], level: Level) -> bool:
    value = cells.get(COL_LEVEL, "").strip().lower()
    return not value or value == level.value


def _finish(source: str, level: Level, beats: list[Fraction]) -> Annotation:
    ordered = sorted(set(beats))
    if ordered and ordered[0] < 0:
        raise MalformedFileError(f"Negative boundary {ordered[0]}", source=source)
    return Annotation(
        source=source,
        level=level,
        boundaries_beats=tuple(float(beat) for beat in ordered),
    )


def parse_boundary_csv(text: str, level: Level, source: str) -> Annotation:
    """Parse a (boundary_beat, level) CSV into an Annotation."""
    header, rows = _read_table(text, source)
    if COL_BOUNDARY not in header:
        raise MissingColumnError(COL_BOUNDARY, source=source)
    beats = []
    for line, row in enumerate(rows, start=2):
        cells = dict(zip(header, row))
        if _level_matches(cells, level):
            beats.append(_beat(cells.get(COL_BOUNDARY, ""), line, source))
    return _finish(source, level, beats)


def parse_boundary_json(text: str, level: Level, source: str) -> Annotation:
    """Parse a {"source", "levels": {level: [beats]}} document."""
    try:
        data = json.loads(text)
        values = data["levels"].get(level.value, [])
        beats = [Fraction(str(value)) for value in values]
    except (ValueError, KeyError, TypeError, AttributeError) as err:
        raise MalformedFileError(f"Bad annotation JSON: {err}", source=source) from err
    return _finish(str(data.get("source") or source), level, beats)


def apply_span_patches(
    header: list[str],
    rows: list[list[str]],
    patches: list[SpanPatch],
    source: str,
) -> list[list[str]]:
    """Return a copy of the span rows with the corrections applied.

    A patch whose old value does not match the file is an error, so a
    correction never lands on the wrong row silently.
    """
    patched = [list(row) for row in rows]
    for patch in patches:
        if patch.source is not None and patch.source != source:
            continue
        if patch.field not in header or not 0 <= patch.row < len(patched):
            raise MalformedFileError(
                f"Patch targets missing cell ({patch.row}, {patch.field})",
                source=source,
            )
        column = header.index(patch.field)
        current = _beat(patched[patch.row][column], patch.row + 2, source)
        if current != patch.old:
            raise MalformedFileError(
                f"Patch mismatch at row {patch.row}: expected {patch.old}, "
                f"found {current}",
                source=source,
            )
        patched[patch.row][column] = str(patch.new)
        _LOGGER.info(
            "%s: row %d %s corrected %s -> %s",
            source,
            patch.row,
            patch.field,
            patch.old,
            patch.new,
        )
    return patched


def parse_span_csv(
    text: str,
    level: Level,
    source: str,
    patches: list[SpanPatch] | None = None,
    shift_beats: Fraction = Fraction(0),
) -> Annotation:
    """Convert annotated segments into a boundary list.

    Every span end is a boundary, and so is every span start except the
    earliest one (the piece start). shift_beats is subtracted from all
    values, which aligns annotations of a piece with an anacrusis to a
    note list that was shifted to start at beat 0.

    Raises:
        MissingColumnError: start_beat or end_beat absent.
        SpanOrderError: A span does not start before it ends.
    """
    header, rows = _read_table(text, source)
    for required in (COL_START, COL_END):
        if required not in header:
            raise MissingColumnError(required, source=source)
    rows = apply_span_patches(header, rows, patches or [], source)

    spans: list[tuple[Fraction, Fraction]] = []
    for line, row in enumerate(rows, start=2):
        cells = dict(zip(header, row))
        if not _level_matches(cells, level):
            continue
        start = _beat(cells.get(COL_START, ""), line, source) - shift_beats
        end = _beat(cells.get(COL_END, ""), line, source) - shift_beats
        if start >= end:
            raise SpanOrderError(
                f"Line {line}: span start {start} not before end {end}",
                source=source,
            )
        spans.append((start, end))

    if not spans:
        return _finish(source, level, [])
    first_start = min(start for start, _ in spans)
    beats = [end for _, end in spans]
    beats.extend(start for start, _ in spans if start != first_start)
    return _finish(source, level, beats)


def load_span_patches(path: Path) -> list[SpanPatch]:
    """Read a JSON list of span corrections."""
    try:
        entries = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as err:
        raise MalformedFileError(
            f"Unreadable patch file: {err}", source=str(path)
        ) from err
    if not isinstance(entries, list):
        raise MalformedFileError("Patch file must hold a list", source=str(path))
    return [SpanPatch.from_dict(entry) for entry in entries]


def load_annotation(
    path: Path,
    level: Level,
    patch_path: Path | None = None,
    shift_beats: Fraction = Fraction(0),
) -> Annotation:
    """Load an annotation file, choosing the layout from suffix and header.

    The Annotation source is the file stem, which is how annotations
    pair with estimates.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as err:
        raise MalformedFileError(f"Unreadable file: {err}", source=str(path)) from err

    source = path.stem
    if path.suffix.lower() == ".json":
        annotation = parse_boundary_json(text, level, source)
        return Annotation(source, level, annotation.boundaries_beats)

    header, _ = _read_table(text, source)
    if COL_START in header:
        patches = load_span_patches(patch_path) if patch_path else None
        return parse_span_csv(text, level, source, patches, shift_beats)
    return parse_boundary_csv(text, level, source)
