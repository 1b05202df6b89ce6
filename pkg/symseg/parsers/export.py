"""Output codecs: JSON results, flat CSV tables and plot data.

Writers produce byte-identical output for identical input: JSON keys
keep model order, floats use the shortest round-trip repr.
"""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from ..exceptions import MalformedFileError
from ..models.evaluation import BeatErrorHistogram, EvalReport
from ..models.segmentation import Segmentation

REPORT_CSV_COLUMNS = ("file", "P", "R", "F1", "n_ref", "n_est")


def dumps_json(data: Any) -> str:
    """Serialize with a stable layout and trailing newline."""
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def write_text(path: Path, text: str) -> None:
    """Write text, creating parent directories."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def format_table(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """Render rows as CSV text with a header line."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def _cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return int(value)
    if value is None:
        return ""
    return value


# ---------------------------------------------------------------------------
# Segmentations
# ---------------------------------------------------------------------------


def segmentation_to_json(segmentation: Segmentation) -> str:
    """Segmentation as JSON text."""
    return dumps_json(segmentation.as_dict())


def write_segmentation(path: Path, segmentation: Segmentation) -> None:
    """Write a Segmentation JSON file."""
    write_text(path, segmentation_to_json(segmentation))


def read_segmentation(path: Path) -> Segmentation:
    """Load a Segmentation JSON file.

    Raises:
        MalformedFileError: Unreadable file or missing fields.
    """
    try:
        return Segmentation.from_dict(json.loads(path.read_text(encoding="utf-8")))
    except (OSError, ValueError, KeyError, TypeError) as err:
        raise MalformedFileError(
            f"Bad segmentation file: {err}", source=str(path)
        ) from err


# ---------------------------------------------------------------------------
# Evaluation reports
# ---------------------------------------------------------------------------


def report_to_csv(report: EvalReport) -> str:
    """Flat per-file table: file, P, R, F1, n_ref, n_est."""
    return format_table(
        REPORT_CSV_COLUMNS,
        (
            (s.file, s.precision, s.recall, s.f1, s.n_ref, s.n_est)
            for s in report.per_file
        ),
    )


def write_report(json_path: Path, csv_path: Path, report: EvalReport) -> None:
    """Write an EvalReport as JSON and as flat CSV."""
    write_text(json_path, dumps_json(report.as_dict()))
    write_text(csv_path, report_to_csv(report))


def histogram_to_csv(histogram: BeatErrorHistogram) -> str:
    """One row per bin: bin_start, bin_end, count."""
    edges = histogram.bin_edges
    return format_table(
        ("bin_start", "bin_end", "count"),
        zip(edges[:-1], edges[1:], histogram.counts),
    )


# ---------------------------------------------------------------------------
# Plot data
# ---------------------------------------------------------------------------


def matrix_to_csv(matrix: np.ndarray) -> str:
    """One matrix row per line, decimal text, no header."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for row in np.atleast_2d(matrix):
        writer.writerow([_cell(value) for value in row.tolist()])
    return buffer.getvalue()


def signal_to_csv(
    values: np.ndarray,
    markers: Iterable[int] = (),
    positions: np.ndarray | None = None,
) -> str:
    """Signal as (index, value, boundary) rows.

    markers are signal positions flagged with boundary=1; positions
    replaces the default 0..n-1 index column.
    """
    marked = set(markers)
    index = np.arange(len(values)) if positions is None else positions
    return format_table(
        ("index", "value", "boundary"),
        (
            (int(i), float(v), int(int(i) in marked))
            for i, v in zip(index.tolist(), np.asarray(values, dtype=float).tolist())
        ),
    )
