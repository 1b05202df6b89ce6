"""Note graph construction, adjacency matrix and novelty curve.

Two notes are linked when they start together (onset edge), when one
ends exactly where the other starts (consecutive edge) or when one
starts while the other is still sounding (overlap edge). Edges are
found with binary searches over the sorted onsets, so building the
graph costs O(N log N + E) instead of testing all N^2 pairs.
"""

from __future__ import annotations

from collections.abc import Mapping
import logging

import numpy as np

from .const import DEFAULT_CAPACITY_LIMIT
from .exceptions import CapacityExceededError, MatrixTooSmallError
from .models.graph import (
    AdjacencyMatrix,
    EdgeKind,
    NoteGraph,
    NoveltySignal,
    NoveltySource,
)
from .models.note import Piece

_LOGGER = logging.getLogger(__name__)


def _expand_ranges(starts: np.ndarray, stops: np.ndarray) -> np.ndarray:
    """Pairs (i, j) for every j in [starts[i], stops[i]), as an (E, 2) array."""
    counts = np.clip(stops - starts, 0, None)
    total = int(counts.sum())
    if total == 0:
        return np.empty((0, 2), dtype=np.int64)
    rows = np.repeat(np.arange(len(starts), dtype=np.int64), counts)
    first = np.repeat(np.cumsum(counts) - counts, counts)
    cols = np.arange(total, dtype=np.int64) - first + np.repeat(starts, counts)
    return np.column_stack((rows, cols))


def _onset_pairs(onsets: np.ndarray) -> np.ndarray:
    # Sorted onsets: each group of equal onsets is a contiguous index block.
    block_stop = np.searchsorted(onsets, onsets, side="right")
    return _expand_ranges(np.arange(1, len(onsets) + 1, dtype=np.int64), block_stop)


def _consecutive_pairs(
    onsets: np.ndarray, offsets: np.ndarray, tick_tolerance: int
) -> np.ndarray:
    starts = np.searchsorted(onsets, offsets - tick_tolerance, side="left")
    stops = np.searchsorted(onsets, offsets + tick_tolerance, side="right")
    pairs = _expand_ranges(starts, stops)
    pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    if len(pairs) == 0:
        return pairs
    # off(i) == on(j) and off(j) == on(i) can both hold under a tolerance
    return np.unique(np.sort(pairs, axis=1), axis=0)


def _overlap_pairs(onsets: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    # on(i) < on(j) < off(i); a strictly later onset means a later index
    starts = np.searchsorted(onsets, onsets, side="right")
    stops = np.searchsorted(onsets, offsets, side="left")
    return _expand_ranges(starts, stops)


def build_graph(piece: Piece, tick_tolerance: int = 0) -> NoteGraph:
    """Build the undirected note graph of a piece.

    Args:
        piece: Onset-sorted piece.
        tick_tolerance: Allowed |off(i) - on(j)| for consecutive edges.
            0 means exact tick equality.

    Returns:
        NoteGraph with one (i, j) row per edge and kind, i < j.
    """
    if tick_tolerance < 0:
        raise ValueError("tick_tolerance must be >= 0")
    if piece.n_notes <= 1:
        return NoteGraph(node_count=piece.n_notes)

    onsets = piece.onsets
    offsets = piece.offsets
    graph = NoteGraph(
        node_count=piece.n_notes,
        onset=_onset_pairs(onsets),
        consecutive=_consecutive_pairs(onsets, offsets, tick_tolerance),
        overlap=_overlap_pairs(onsets, offsets),
    )
    _LOGGER.debug(
        "Graph for %s: %d nodes, %d onset, %d consecutive, %d overlap edges",
        piece.source_path or "<piece>",
        graph.node_count,
        len(graph.onset),
        len(graph.consecutive),
        len(graph.overlap),
    )
    return graph


def adjacency(
    graph: NoteGraph,
    max_notes: int = DEFAULT_CAPACITY_LIMIT,
    weights: Mapping[EdgeKind, float] | None = None,
    cap: float = 1.0,
) -> AdjacencyMatrix:
    """Dense symmetric adjacency matrix of a note graph.

    With the default weights and cap the matrix is binary: 1 where any
    edge kind links the two notes. Custom weights sum the weights of the
    kinds present and clip the sum at cap.

    Raises:
        CapacityExceededError: node_count above max_notes.
    """
    n = graph.node_count
    if n > max_notes:
        raise CapacityExceededError(n, max_notes)

    upper = np.zeros((n, n), dtype=np.float64)
    for kind in EdgeKind:
        pairs = graph.pairs(kind)
        if len(pairs) == 0:
            continue
        weight = 1.0 if weights is None else float(weights.get(kind, 1.0))
        np.add.at(upper, (pairs[:, 0], pairs[:, 1]), weight)

    np.minimum(upper, cap, out=upper)
    return AdjacencyMatrix(n=n, data=upper + upper.T)


def novelty(
    matrix: np.ndarray, source: NoveltySource = NoveltySource.ADJACENCY
) -> NoveltySignal:
    """Euclidean distance between each matrix row and the next.

    Raises:
        MatrixTooSmallError: Matrix not square or smaller than 2x2.
    """
    data = np.asarray(matrix, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] != data.shape[1]:
        raise MatrixTooSmallError(f"Matrix must be square, got shape {data.shape}")
    if data.shape[0] < 2:
        raise MatrixTooSmallError("Novelty needs at least two rows")
    values = np.linalg.norm(np.diff(data, axis=0), axis=1)
    return NoveltySignal(values=values, source=source)
