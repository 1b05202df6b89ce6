"""Segmentation methods composed from graph, detectors and features.

G-PELT and G-Window both read the novelty curve of the note graph's
adjacency matrix. A changepoint at position t of that curve is the
change between notes t and t + 1, so the boundary is placed at the
onset of note t + 1, the first note of the new segment.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging
from pathlib import Path

import numpy as np

from .changepoint import KernelCost, PeltParams, SelectionRule, pelt, window_detect
from .const import (
    DEFAULT_CAPACITY_LIMIT,
    DEFAULT_TICKS_PER_QUARTER,
    NOTES_PER_WINDOW_UNIT,
)
from .evaluation import equidistant_baseline
from .exceptions import InvalidParamsError, TooFewNotesError
from .graph import adjacency, build_graph, novelty
from .models.note import Piece
from .models.segmentation import Boundary, Method, MethodParams, Segmentation
from .norm_method import (
    COMBINE_SUM,
    MIN_NOTES,
    candidate_window,
    norm_segment,
    round_half_up,
)
from .parsers import load_piece

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunOptions:
    """Settings shared by all methods that are not method parameters."""

    capacity_limit: int = DEFAULT_CAPACITY_LIMIT
    tick_tolerance: int = 0
    ticks_per_quarter: int = DEFAULT_TICKS_PER_QUARTER
    combine: str = COMBINE_SUM


def graph_novelty(piece: Piece, options: RunOptions | None = None) -> np.ndarray:
    """Novelty curve of the piece's adjacency matrix, length N - 1.

    Raises:
        TooFewNotesError: Fewer than four notes.
        CapacityExceededError: Piece too large for a dense matrix.
    """
    options = options or RunOptions()
    if piece.n_notes < MIN_NOTES:
        raise TooFewNotesError(MIN_NOTES, piece.n_notes, source=piece.source_path)
    graph = build_graph(piece, options.tick_tolerance)
    matrix = adjacency(graph, max_notes=options.capacity_limit)
    return novelty(matrix.data).values


def _graph_cost(piece: Piece, options: RunOptions) -> KernelCost:
    cost = KernelCost.from_signal(graph_novelty(piece, options))
    _LOGGER.debug(
        "%s: novelty length %d, gamma %.6g",
        piece.source_path or "<piece>",
        cost.length,
        cost.gamma,
    )
    return cost


def g_pelt(
    piece: Piece,
    alpha: float,
    beta: float,
    penalty: float,
    options: RunOptions | None = None,
) -> Segmentation:
    """Segment with PELT on the adjacency novelty curve.

    min_size = candidate_window(alpha, N), jump = max(1, round(beta *
    min_size)).

    Raises:
        TooFewNotesError: Fewer than four notes.
        CapacityExceededError: Piece too large for a dense matrix.
    """
    params = MethodParams(Method.G_PELT, alpha=alpha, beta=beta, penalty=penalty)
    params.validate()
    cost = _graph_cost(piece, options or RunOptions())
    min_size = candidate_window(alpha, piece.n_notes)
    jump = max(1, round_half_up(beta * min_size))
    search = PeltParams(min_size=min_size, jump=jump, penalty=penalty)
    changepoints = pelt(cost, search)
    notes = [t + 1 for t in changepoints.interior]
    return Segmentation.from_note_indices(piece, notes, params)


def window_size(alpha: float, n_notes: int) -> int:
    """Even G-Window size, at least 2."""
    window = max(2, round_half_up(alpha * n_notes / NOTES_PER_WINDOW_UNIT))
    return window + window % 2


def g_window(
    piece: Piece,
    alpha: float,
    penalty: float,
    options: RunOptions | None = None,
) -> Segmentation:
    """Segment with the sliding-window discrepancy on the novelty curve.

    Peaks with discrepancy above penalty * max discrepancy are kept.

    Raises:
        TooFewNotesError: Fewer than four notes.
        WindowTooLargeError: Window does not fit the novelty curve.
    """
    params = MethodParams(Method.G_WINDOW, alpha=alpha, penalty=penalty)
    params.validate()
    cost = _graph_cost(piece, options or RunOptions())
    window = window_size(alpha, piece.n_notes)
    changepoints = window_detect(cost, window, SelectionRule(penalty=penalty))
    notes = [t + 1 for t in changepoints.interior]
    return Segmentation.from_note_indices(piece, notes, params)


def baseline_segmentation(piece: Piece, k: int) -> Segmentation:
    """k equidistant boundaries over the piece duration, the last at its end."""
    params = MethodParams(Method.BASELINE, k=k)
    params.validate()
    if piece.n_notes == 0:
        raise TooFewNotesError(1, 0, source=piece.source_path)
    seconds_per_beat = piece.timing.tempo_us_per_quarter / 1_000_000
    beats = equidistant_baseline(float(piece.duration_beats), k)
    return Segmentation(
        boundaries=tuple(
            Boundary(note_index=None, beat=beat, second=beat * seconds_per_beat)
            for beat in beats
        ),
        method_params=params,
        piece_ref=piece.source_path,
        includes_final=True,
        time_signature=piece.timing.time_signature,
        origin_beats=float(piece.metadata.origin_beats),
    )


def run_method(
    piece: Piece, params: MethodParams, options: RunOptions | None = None
) -> Segmentation:
    """Dispatch to the method named in params.

    Raises:
        InvalidParamsError: Parameters missing or out of range.
    """
    params.validate()
    options = options or RunOptions()
    if params.method is Method.NORM:
        if params.norm is None:
            raise InvalidParamsError("norm parameters are required")
        return norm_segment(piece, params.norm, options.combine)
    if params.method is Method.BASELINE:
        if params.k is None:
            raise InvalidParamsError("k is required")
        return baseline_segmentation(piece, params.k)
    if params.alpha is None or params.penalty is None:
        raise InvalidParamsError("alpha and penalty are required")
    if params.method is Method.G_PELT:
        if params.beta is None:
            raise InvalidParamsError("beta is required")
        return g_pelt(piece, params.alpha, params.beta, params.penalty, options)
    return g_window(piece, params.alpha, params.penalty, options)


def segment_file(
    path: Path, params: MethodParams, options: RunOptions | None = None
) -> Segmentation:
    """Load a MIDI or note CSV file and segment it."""
    options = options or RunOptions()
    piece = load_piece(path, options.ticks_per_quarter)
    segmentation = run_method(piece, params, options)
    _LOGGER.info(
        "%s: %d boundaries (%s)",
        path,
        len(segmentation.boundaries),
        params.method.value,
    )
    return segmentation
