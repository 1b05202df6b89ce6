"""Boundary detection scoring.

Estimated and reference boundaries are matched one-to-one inside a
tolerance window (maximum bipartite matching, via mir_eval), giving
precision, recall and F1 per file. Corpus scores are macro averages
with population standard deviations.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
import logging
from pathlib import Path
from typing import TypeVar

import mir_eval
import numpy as np

from .const import (
    DEFAULT_HISTOGRAM_BIN_BEATS,
    NORM_STAGE_CANDIDATES,
    NORM_STAGE_REFINED,
)
from .exceptions import EvaluationError, UnpairedFileError
from .models.evaluation import (
    AggregateScore,
    Annotation,
    BeatErrorHistogram,
    EvalReport,
    FileScore,
    Matching,
    ToleranceKind,
)
from .models.note import TimingContext
from .models.segmentation import Method, Segmentation

_LOGGER = logging.getLogger(__name__)

_T = TypeVar("_T")


def match_boundaries(
    reference: Sequence[float], estimate: Sequence[float], tolerance: float
) -> Matching:
    """Match boundaries one-to-one within +-tolerance beats.

    An empty side leaves its score undefined; it is reported as 0 and
    flagged on the Matching.

    Raises:
        ValueError: tolerance not positive.
    """
    if not tolerance > 0:
        raise ValueError(f"tolerance must be > 0, got {tolerance}")
    ref = np.sort(np.asarray(reference, dtype=np.float64))
    est = np.sort(np.asarray(estimate, dtype=np.float64))

    if len(ref) == 0 or len(est) == 0:
        return Matching(
            pairs=(),
            precision=0.0,
            recall=0.0,
            f1=0.0,
            n_ref=len(ref),
            n_est=len(est),
            reference_empty=len(ref) == 0,
            estimate_empty=len(est) == 0,
        )

    pairs = tuple(sorted(mir_eval.util.match_events(ref, est, tolerance)))
    precision = len(pairs) / len(est)
    recall = len(pairs) / len(ref)
    return Matching(
        pairs=tuple((int(i), int(j)) for i, j in pairs),
        precision=precision,
        recall=recall,
        f1=float(mir_eval.util.f_measure(precision, recall)),
        n_ref=len(ref),
        n_est=len(est),
    )


def tolerance_in_beats(
    kind: ToleranceKind, timing: TimingContext | tuple[int, int]
) -> float:
    """Tolerance width in quarter-note beats.

    One beat is always 1.0; one bar is numerator * 4 / denominator, so
    a 3/8 bar is 1.5 beats.
    """
    if kind is ToleranceKind.ONE_BEAT:
        return 1.0
    numerator, denominator = (
        timing.time_signature if isinstance(timing, TimingContext) else timing
    )
    return numerator * 4 / denominator


def equidistant_baseline(piece_duration_beats: float, k: int) -> list[float]:
    """k evenly spaced boundaries; the k-th is the end of the piece."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not piece_duration_beats > 0:
        raise ValueError(f"Duration must be > 0, got {piece_duration_beats}")
    return [i * piece_duration_beats / k for i in range(1, k + 1)]


def _binned(distances: np.ndarray, bin_width_beats: float) -> BeatErrorHistogram:
    if len(distances) == 0:
        return BeatErrorHistogram(bin_edges=(0.0, bin_width_beats), counts=(0,))
    bins = np.floor(distances / bin_width_beats).astype(np.int64)
    counts = np.bincount(bins, minlength=1)
    edges = bin_width_beats * np.arange(len(counts) + 1)
    return BeatErrorHistogram(
        bin_edges=tuple(float(e) for e in edges),
        counts=tuple(int(c) for c in counts),
    )


def _nearest_distances(
    reference: Sequence[float], estimate: Sequence[float]
) -> np.ndarray:
    ref = np.asarray(reference, dtype=np.float64)
    est = np.asarray(estimate, dtype=np.float64)
    if len(ref) == 0 or len(est) == 0:
        return np.empty(0, dtype=np.float64)
    return np.abs(np.subtract.outer(est, ref)).min(axis=1)


def beat_error_histogram(
    reference: Sequence[float],
    estimate: Sequence[float],
    bin_width_beats: float = DEFAULT_HISTOGRAM_BIN_BEATS,
) -> BeatErrorHistogram:
    """Histogram of each estimate's distance to its nearest reference.

    Bins are [k * width, (k + 1) * width). With no reference there is no
    distance to measure and the histogram is empty.
    """
    if not bin_width_beats > 0:
        raise ValueError(f"bin width must be > 0, got {bin_width_beats}")
    return _binned(_nearest_distances(reference, estimate), bin_width_beats)


def _stem(source: str) -> str:
    return Path(source).stem


def _estimate_beats(segmentation: Segmentation, norm_stage: str) -> list[float]:
    if (
        norm_stage == NORM_STAGE_CANDIDATES
        and segmentation.method_params.method is Method.NORM
        and segmentation.candidates
    ):
        return segmentation.candidate_beats
    return segmentation.beats


def _reference_beats(
    annotation: Annotation, segmentation: Segmentation, tolerance: float
) -> list[float]:
    """Reference boundaries with the end of the piece counted.

    Annotation beats are moved onto the estimate's axis when the piece
    was shifted to start at beat 0. The end boundary of the estimate is
    added when the annotation has nothing within tolerance of it.
    """
    beats = [b - segmentation.origin_beats for b in annotation.boundaries_beats]
    if segmentation.includes_final and segmentation.boundaries:
        end = segmentation.boundaries[-1].beat
        if not beats or max(beats) < end - tolerance:
            beats.append(end)
    return beats


def score_file(
    annotation: Annotation,
    segmentation: Segmentation,
    tolerance_beats: float,
    norm_stage: str = NORM_STAGE_REFINED,
) -> FileScore:
    """Score one estimate against its annotation; beat 0 is not a boundary."""
    reference = [
        b for b in _reference_beats(annotation, segmentation, tolerance_beats) if b > 0
    ]
    estimate = [b for b in _estimate_beats(segmentation, norm_stage) if b > 0]
    matching = match_boundaries(reference, estimate, tolerance_beats)
    return FileScore(
        file=_stem(segmentation.piece_ref),
        precision=matching.precision,
        recall=matching.recall,
        f1=matching.f1,
        n_ref=matching.n_ref,
        n_est=matching.n_est,
        tolerance_beats=tolerance_beats,
        reference_empty=matching.reference_empty,
        estimate_empty=matching.estimate_empty,
    )


def aggregate_scores(scores: Sequence[FileScore]) -> AggregateScore:
    """Macro mean and population std of P, R and F1."""
    if not scores:
        return AggregateScore()
    table = np.array([[s.precision, s.recall, s.f1] for s in scores])
    means = table.mean(axis=0)
    stds = table.std(axis=0)
    return AggregateScore(
        p_mean=float(means[0]),
        p_std=float(stds[0]),
        r_mean=float(means[1]),
        r_std=float(stds[1]),
        f1_mean=float(means[2]),
        f1_std=float(stds[2]),
    )


def evaluate_corpus(
    annotations: Sequence[Annotation],
    segmentations: Sequence[Segmentation],
    tolerance: ToleranceKind,
    norm_stage: str = NORM_STAGE_REFINED,
    allow_unpaired: bool = False,
) -> EvalReport:
    """Score a corpus, pairing files by the stem of their source path.

    The one-bar tolerance uses each estimate's time signature. Files are
    scored in sorted order so the aggregate does not depend on input
    order.

    Args:
        annotations: Reference boundaries, one per file.
        segmentations: Estimates, one per file.
        tolerance: One beat or one bar.
        norm_stage: "candidates" scores Norm's stage-one boundaries.
        allow_unpaired: Score the paired files and list the rest in the
            report instead of raising.

    Raises:
        UnpairedFileError: Files without a counterpart, unless allowed.
        EvaluationError: Two inputs share a stem.
    """
    references = _index(annotations, lambda a: a.source)
    estimates = _index(segmentations, lambda s: s.piece_ref)

    unpaired = set(references) ^ set(estimates)
    if unpaired and not allow_unpaired:
        raise UnpairedFileError(unpaired)
    if unpaired:
        _LOGGER.warning("Skipping %d unpaired files", len(unpaired))

    scores = []
    widths = set()
    for stem in sorted(set(references) & set(estimates)):
        segmentation = estimates[stem]
        width = tolerance_in_beats(tolerance, segmentation.time_signature)
        widths.add(width)
        scores.append(score_file(references[stem], segmentation, width, norm_stage))

    aggregate = aggregate_scores(scores)
    _LOGGER.info(
        "Evaluated %d files at %s: %s", len(scores), tolerance.value, aggregate.summary
    )
    return EvalReport(
        per_file=tuple(scores),
        aggregate=aggregate,
        tolerance=tolerance,
        tolerance_beats=widths.pop() if len(widths) == 1 else None,
        unpaired=tuple(sorted(unpaired)),
    )


def _index(items: Sequence[_T], key: Callable[[_T], str]) -> dict[str, _T]:
    indexed: dict[str, _T] = {}
    for item in items:
        stem = _stem(key(item))
        if stem in indexed:
            raise EvaluationError(f"Duplicate source {stem!r}")
        indexed[stem] = item
    return indexed


def corpus_error_histogram(
    annotations: Sequence[Annotation],
    segmentations: Sequence[Segmentation],
    bin_width_beats: float = DEFAULT_HISTOGRAM_BIN_BEATS,
    norm_stage: str = NORM_STAGE_REFINED,
) -> BeatErrorHistogram:
    """Beat error histogram pooled over every paired file.

    Each file contributes the boundaries score_file would match: beat 0
    excluded and the end of the piece counted on both sides. Unpaired
    files are skipped.

    Raises:
        ValueError: bin width not positive.
        EvaluationError: Two inputs share a stem.
    """
    if not bin_width_beats > 0:
        raise ValueError(f"bin width must be > 0, got {bin_width_beats}")
    references = _index(annotations, lambda a: a.source)
    estimates = _index(segmentations, lambda s: s.piece_ref)
    distances = []
    for stem in sorted(set(references) & set(estimates)):
        segmentation = estimates[stem]
        reference = [
            b for b in _reference_beats(references[stem], segmentation, 0.0) if b > 0
        ]
        estimate = [b for b in _estimate_beats(segmentation, norm_stage) if b > 0]
        distances.append(_nearest_distances(reference, estimate))
    pooled = np.concatenate(distances) if distances else np.empty(0)
    return _binned(pooled, bin_width_beats)
