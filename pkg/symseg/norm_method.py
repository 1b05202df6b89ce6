"""Two-stage segmentation from normalized note features.

Stage one turns each gap between consecutive notes into a feature
(inter-onset interval in beats plus the pitch direction), z-scores it
and peak-picks boundary candidates. Stage two compares the spans
between candidates with a distance matrix, takes its novelty and
peak-picks again to keep the candidates where the material changes.
"""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy.ndimage import maximum_filter1d
from scipy.spatial.distance import pdist, squareform

from .const import NOTES_PER_WINDOW_UNIT
from .exceptions import TooFewCandidatesError, TooFewNotesError
from .graph import novelty
from .models.features import FeatureVector, NormResult, SegmentSSM
from .models.graph import NoveltySource
from .models.note import Piece
from .models.segmentation import Method, MethodParams, NormParams, Segmentation

_LOGGER = logging.getLogger(__name__)

COMBINE_SUM = "sum"
COMBINE_CONCAT = "concat"

MIN_NOTES = 4

# Spread below this (relative to the mean) counts as a constant signal.
FLAT_RTOL = 1e-12


def round_half_up(value: float) -> int:
    """Round to the nearest integer, halves away from zero for positives."""
    return math.floor(value + 0.5)


def candidate_window(alpha: float, n_notes: int) -> int:
    """Window size in notes, proportional to the piece length.

    w = max(1, round(alpha * N / 15)). All methods size their windows
    with this helper.
    """
    return max(1, round_half_up(alpha * n_notes / NOTES_PER_WINDOW_UNIT))


def _require_notes(piece: Piece, required: int) -> None:
    if piece.n_notes < required:
        raise TooFewNotesError(required, piece.n_notes, source=piece.source_path)


def ioi(piece: Piece) -> np.ndarray:
    """Inter-onset intervals in beats, length N - 1.

    Raises:
        TooFewNotesError: Fewer than two notes.
    """
    _require_notes(piece, 2)
    return np.diff(piece.onsets).astype(np.float64) / piece.timing.ticks_per_quarter


def local_direction(piece: Piece) -> np.ndarray:
    """Sign of each pitch step: 1 up, 0 repeated, -1 down.

    Raises:
        TooFewNotesError: Fewer than two notes.
    """
    _require_notes(piece, 2)
    return np.sign(np.diff(piece.pitches)).astype(np.int64)


def _mean_std(values: np.ndarray) -> tuple[float, float]:
    mean = float(np.mean(values))
    std = float(np.std(values))
    if std <= FLAT_RTOL * max(1.0, abs(mean)):
        std = 0.0
    return mean, std


def zscore(values: np.ndarray) -> np.ndarray:
    """Z-score with the population standard deviation; zeros if flat."""
    data = np.asarray(values, dtype=np.float64)
    if len(data) == 0:
        return data.copy()
    mean, std = _mean_std(data)
    if std == 0.0:
        return np.zeros_like(data)
    return (data - mean) / std


def peak_pick(signal: np.ndarray, window: int, threshold: float) -> np.ndarray:
    """Indices of thresholded local maxima.

    i is kept when signal[i] is the maximum of signal[i - window :
    i + window + 1] (clipped at the ends), exceeds mean + threshold * std
    of the whole signal, and starts its plateau of equal values.
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    data = np.asarray(signal, dtype=np.float64)
    if len(data) == 0:
        return np.empty(0, dtype=np.int64)
    mean, std = _mean_std(data)
    if std == 0.0:
        return np.empty(0, dtype=np.int64)

    is_max = maximum_filter1d(data, size=2 * window + 1, mode="nearest") == data
    above = data > mean + threshold * std
    plateau_start = np.ones(len(data), dtype=bool)
    plateau_start[1:] = data[1:] != data[:-1]
    return np.flatnonzero(is_max & above & plateau_start)


def extract_features(piece: Piece) -> FeatureVector:
    """IOI, direction, their sum and its z-score."""
    intervals = ioi(piece)
    direction = local_direction(piece)
    combined = intervals + direction
    return FeatureVector(
        ioi=intervals,
        direction=direction,
        combined=combined,
        normalized=zscore(combined),
    )


def segment_ssm(
    piece: Piece,
    candidates: list[int] | tuple[int, ...] | np.ndarray,
    combine: str = COMBINE_SUM,
) -> SegmentSSM:
    """Distance matrix between the spans delimited by candidate notes.

    Span k holds notes [b_{k-1}, b_k) with b_0 = 0 and b_{C+1} = N; its
    vector is built from the IOIs and directions inside the span,
    summed elementwise ("sum") or concatenated ("concat"), then zero
    padded to the longest span.

    Raises:
        TooFewCandidatesError: Fewer than two candidates.
    """
    bounds = [int(b) for b in candidates]
    if len(bounds) < 2:
        raise TooFewCandidatesError(
            f"Segment SSM needs 2 candidates, got {len(bounds)}",
            source=piece.source_path,
        )
    if combine not in (COMBINE_SUM, COMBINE_CONCAT):
        raise ValueError(f"Unknown combine mode {combine!r}")

    intervals = ioi(piece)
    direction = local_direction(piece).astype(np.float64)
    edges = [0, *bounds, piece.n_notes]

    vectors = []
    for start, stop in zip(edges[:-1], edges[1:]):
        span_ioi = intervals[start : max(start, stop - 1)]
        span_dir = direction[start : max(start, stop - 1)]
        if combine == COMBINE_SUM:
            vectors.append(span_ioi + span_dir)
        else:
            vectors.append(np.concatenate((span_ioi, span_dir)))

    width = max(1, max(len(v) for v in vectors))
    padded = np.zeros((len(vectors), width), dtype=np.float64)
    for row, vector in enumerate(vectors):
        padded[row, : len(vector)] = vector

    matrix = squareform(pdist(padded, metric="euclidean"))
    return SegmentSSM(matrix=matrix, segment_vectors=tuple(padded))


def norm_analyze(
    piece: Piece, params: NormParams, combine: str = COMBINE_SUM
) -> NormResult:
    """Run both stages and keep every intermediate result.

    Raises:
        TooFewNotesError: Fewer than four notes.
    """
    params.validate()
    _require_notes(piece, MIN_NOTES)

    features = extract_features(piece)
    window = candidate_window(params.alpha1, piece.n_notes)
    # a peak at gap i marks the note after the gap
    candidates = tuple(
        int(i) + 1 for i in peak_pick(features.normalized, window, params.tau1)
    )
    _LOGGER.debug(
        "%s: w1=%d, %d candidates", piece.source_path, window, len(candidates)
    )

    if len(candidates) < 2:
        return NormResult(
            features=features,
            window=window,
            candidates=candidates,
            ssm=None,
            ssm_novelty=None,
            refined=candidates,
        )

    ssm = segment_ssm(piece, candidates, combine)
    curve = novelty(ssm.matrix, NoveltySource.SSM).values
    # novelty[k] compares span k and k + 1, which meet at candidates[k]
    refined = tuple(candidates[k] for k in peak_pick(curve, params.w2, params.tau2))
    _LOGGER.debug("%s: %d refined boundaries", piece.source_path, len(refined))
    return NormResult(
        features=features,
        window=window,
        candidates=candidates,
        ssm=ssm,
        ssm_novelty=curve,
        refined=refined,
    )


def norm_segment(
    piece: Piece, params: NormParams, combine: str = COMBINE_SUM
) -> Segmentation:
    """Segment a piece; boundaries hold the refined set, candidates stage one."""
    result = norm_analyze(piece, params, combine)
    return Segmentation.from_note_indices(
        piece,
        result.refined,
        MethodParams(method=Method.NORM, norm=params),
        candidate_indices=result.candidates,
    )
