"""Changepoint detection over 1-D signals with an RBF kernel cost.

The cost of a segment is its scatter in the kernel feature space:
``C(a, b) = sum_t K[t, t] - sum_{s,t} K[s, t] / (b - a)`` over
``[a, b)``, with ``K[s, t] = exp(-gamma * (y_s - y_t) ** 2)``. Block sums
of K are read from a 2-D cumulative sum, so each cost is O(1) after an
O(T^2) precomputation.

Two detectors share it:

* ``pelt`` finds the exact minimizer of total cost plus a penalty per
  changepoint, restricted to a jump grid and a minimum segment length;
* ``window_detect`` slides a window and keeps peaks of the discrepancy
  between one cost over the window and the costs of its two halves.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import logging
import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.spatial.distance import pdist, squareform

from .exceptions import (
    EmptySegmentError,
    InvalidChangepointsError,
    InvalidParamsError,
    WindowTooLargeError,
)
from .protocols.cost import ISegmentCost

_LOGGER = logging.getLogger(__name__)

# Relative slack for score ties and the pruning test; absorbs rounding in
# the cost sums.
SCORE_RTOL = 1e-9


def _within(value: float, best: float) -> bool:
    """True when value is no worse than best up to SCORE_RTOL."""
    return value <= best + SCORE_RTOL * max(1.0, abs(best))


def median_heuristic_gamma(y: np.ndarray) -> float:
    """RBF bandwidth from the median pairwise squared difference.

    Returns 1 / median((y_s - y_t)^2) over s < t, or 1.0 when the median
    is zero or there are fewer than two samples.
    """
    values = np.asarray(y, dtype=np.float64).reshape(-1, 1)
    if len(values) < 2:
        return 1.0
    median = float(np.median(pdist(values, metric="sqeuclidean")))
    if median <= 0.0:
        return 1.0
    return 1.0 / median


@dataclass(frozen=True, eq=False)
class KernelCost:
    """RBF kernel mean-change cost with a precomputed Gram matrix.

    Build with KernelCost.from_signal(); the Gram matrix and its
    integral image are derived from signal and gamma.
    """

    signal: np.ndarray
    gamma: float
    gram: np.ndarray = field(init=False, repr=False)
    _integral: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        """Validate gamma and precompute the Gram matrix."""
        if not self.gamma > 0 or not math.isfinite(self.gamma):
            raise InvalidParamsError(f"gamma must be positive, got {self.gamma}")
        signal = np.asarray(self.signal, dtype=np.float64).reshape(-1)
        distances = squareform(pdist(signal.reshape(-1, 1), metric="sqeuclidean"))
        gram = np.exp(-self.gamma * distances)
        integral = np.zeros((len(signal) + 1, len(signal) + 1), dtype=np.float64)
        integral[1:, 1:] = gram.cumsum(axis=0).cumsum(axis=1)
        object.__setattr__(self, "signal", signal)
        object.__setattr__(self, "gram", gram)
        object.__setattr__(self, "_integral", integral)

    @classmethod
    def from_signal(
        cls, signal: np.ndarray, gamma: float | None = None
    ) -> KernelCost:
        """Create a cost, choosing gamma by the median heuristic if not given."""
        if gamma is None:
            gamma = median_heuristic_gamma(signal)
        return cls(signal=np.asarray(signal, dtype=np.float64), gamma=gamma)

    @property
    def length(self) -> int:
        """Signal length T."""
        return len(self.signal)

    def cost(self, start: int, end: int) -> float:
        """Cost of [start, end); see segment_cost."""
        return float(self.costs_to(np.array([start], dtype=np.int64), end)[0])

    def costs_to(self, starts: np.ndarray, end: int) -> np.ndarray:
        """Costs of [s, end) for each s in starts, all with s < end."""
        integral = self._integral
        size = (end - starts).astype(np.float64)
        block = (
            integral[end, end]
            - integral[starts, end]
            - integral[end, starts]
            + integral[starts, starts]
        )
        # diagonal of K is all ones, so its sum over the block is its size
        scatter = np.maximum(size - block / size, 0.0)
        return np.where(size == 1.0, 0.0, scatter)


def segment_cost(cost: ISegmentCost, start: int, end: int) -> float:
    """Kernel mean-change cost of the segment [start, end).

    Raises:
        EmptySegmentError: start >= end.
        ValueError: Bounds outside [0, T].
    """
    if start >= end:
        raise EmptySegmentError(start, end)
    if start < 0 or end > cost.length:
        raise ValueError(f"Segment [{start}, {end}) outside [0, {cost.length}]")
    if end - start == 1:
        return 0.0
    return cost.cost(start, end)


@dataclass(frozen=True)
class PeltParams:
    """PELT search space and penalty."""

    min_size: int = 1
    jump: int = 1
    penalty: float = 0.0

    def __post_init__(self) -> None:
        """Validate ranges."""
        if self.min_size < 1:
            raise InvalidParamsError(f"min_size must be >= 1, got {self.min_size}")
        if self.jump < 1:
            raise InvalidParamsError(f"jump must be >= 1, got {self.jump}")
        if self.penalty < 0 or not math.isfinite(self.penalty):
            raise InvalidParamsError(f"penalty must be >= 0, got {self.penalty}")


@dataclass(frozen=True)
class Changepoints:
    """Segment end indices; the last one is the signal length T."""

    indices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def interior(self) -> tuple[int, ...]:
        """Changepoints without the final T."""
        return self.indices[:-1]

    def validate(self, length: int, min_size: int = 1, jump: int = 1) -> Changepoints:
        """Check ordering, end, gap and grid rules and return self.

        Raises:
            InvalidChangepointsError: Any rule violated.
        """
        if not self.indices or self.indices[-1] != length:
            raise InvalidChangepointsError(
                f"Changepoints {self.indices} must end at {length}"
            )
        previous = 0
        for index in self.indices:
            if index <= previous:
                raise InvalidChangepointsError(
                    f"Changepoints not strictly increasing: {self.indices}"
                )
            if len(self.indices) > 1 and index - previous < min_size:
                raise InvalidChangepointsError(
                    f"Segment [{previous}, {index}) shorter than {min_size}"
                )
            previous = index
        off_grid = [index for index in self.interior if index % jump]
        if off_grid:
            raise InvalidChangepointsError(
                f"Changepoints {off_grid} not multiples of jump {jump}"
            )
        return self


def _path(previous: dict[int, int], end: int) -> tuple[int, ...]:
    """Changepoints of the stored best segmentation ending at end."""
    indices: list[int] = []
    while end != 0:
        indices.append(end)
        end = previous[end]
    return tuple(reversed(indices))


def _pick_start(
    scores: np.ndarray,
    usable: np.ndarray,
    segments: dict[int, int],
    previous: dict[int, int],
) -> int:
    """Position in usable of the start that extends best to the current end."""
    best = float(scores.min())
    tied = [i for i, score in enumerate(scores.tolist()) if _within(score, best)]
    if len(tied) == 1:
        return tied[0]
    most = max(segments[int(usable[i])] for i in tied)
    tied = [i for i in tied if segments[int(usable[i])] == most]
    # equal counts and a shared end: compare the paths to each start
    return min(tied, key=lambda i: _path(previous, int(usable[i])))


def pelt(cost: ISegmentCost, params: PeltParams) -> Changepoints:
    """Exact penalized segmentation with PELT pruning.

    Minimizes sum of segment costs + penalty * number of changepoints
    over segmentations whose changepoints are multiples of jump and
    whose segments are at least min_size long.

    Segmentations whose objectives agree to SCORE_RTOL are ties. Among
    them the one with the most changepoints wins, then the
    lexicographically smallest index tuple. With penalty 0 and min_size 1
    every sample is therefore a changepoint.

    A start tau is dropped at end t once F(tau) + C(tau, t) exceeds F(t)
    by more than SCORE_RTOL.
    Because a start is only usable for segments of at least min_size,
    the drop takes effect from t + min_size on; before that tau can still
    be the only admissible start.
    """
    length = cost.length
    min_size, jump, penalty = params.min_size, params.jump, params.penalty
    if length < 2 * min_size:
        return Changepoints((length,)).validate(length)

    ends = [t for t in range(min_size, length - min_size + 1) if t % jump == 0]
    ends.append(length)

    best_cost: dict[int, float] = {0: -penalty}
    previous: dict[int, int] = {}
    segments: dict[int, int] = {0: 0}
    starts: list[int] = [0]
    expires: dict[int, float] = {0: math.inf}

    for end in ends:
        live = [tau for tau in starts if expires[tau] > end]
        starts = live
        usable = np.array(
            [tau for tau in live if end - tau >= min_size], dtype=np.int64
        )

        base = np.array([best_cost[int(tau)] for tau in usable], dtype=np.float64)
        totals = base + cost.costs_to(usable, end)
        scores = totals + penalty
        pick = _pick_start(scores, usable, segments, previous)
        best = float(scores[pick])
        best_cost[end] = best
        previous[end] = int(usable[pick])
        segments[end] = segments[previous[end]] + 1

        for tau, total in zip(usable.tolist(), totals.tolist()):
            if not _within(total, best):
                expires[tau] = min(expires[tau], end + min_size)

        if end != length:
            starts.append(end)
            expires[end] = math.inf

    result = Changepoints(_path(previous, length))
    _LOGGER.debug(
        "PELT T=%d min_size=%d jump=%d penalty=%s -> %d changepoints",
        length,
        min_size,
        jump,
        penalty,
        len(result) - 1,
    )
    return result.validate(length, min_size, jump)


@dataclass(frozen=True)
class SelectionRule:
    """Peak selection for window detection: penalty ratio or peak count."""

    penalty: float | None = None
    count: int | None = None

    def __post_init__(self) -> None:
        """Exactly one of penalty and count must be set."""
        if (self.penalty is None) == (self.count is None):
            raise InvalidParamsError("Set exactly one of penalty and count")
        if self.penalty is not None and self.penalty < 0:
            raise InvalidParamsError(f"penalty must be >= 0, got {self.penalty}")
        if self.count is not None and self.count < 0:
            raise InvalidParamsError(f"count must be >= 0, got {self.count}")

    def select(self, values: np.ndarray, peaks: np.ndarray) -> np.ndarray:
        """Positions into values of the selected peaks, ascending.

        With a count, heights within SCORE_RTOL of the count-th largest
        are ties and the earlier peaks fill the remaining places.

        Args:
            values: Discrepancy values.
            peaks: Positions of local maxima, ascending.
        """
        if self.penalty is not None:
            top = float(values.max()) if len(values) else 0.0
            if top <= 0.0:
                return np.empty(0, dtype=np.int64)
            return peaks[values[peaks] > self.penalty * top]
        count = self.count or 0
        if count == 0:
            return np.empty(0, dtype=np.int64)
        if count >= len(peaks):
            return peaks
        heights = values[peaks]
        cutoff = float(np.sort(heights)[-count])
        slack = SCORE_RTOL * max(1.0, abs(cutoff))
        above = np.flatnonzero(heights > cutoff + slack)
        tied = np.flatnonzero(np.abs(heights - cutoff) <= slack)
        keep = np.concatenate([above, tied[: count - len(above)]])
        return np.sort(peaks[keep])


def discrepancy(cost: ISegmentCost, window: int) -> tuple[np.ndarray, np.ndarray]:
    """Window discrepancy curve.

    d(i) = C(i - h, i + h) - C(i - h, i) - C(i, i + h), h = window // 2,
    for every i in [h, T - h].

    Returns:
        (positions, values) arrays of equal length.

    Raises:
        InvalidParamsError: window < 2.
        WindowTooLargeError: window >= T.
    """
    length = cost.length
    if window < 2:
        raise InvalidParamsError(f"window must be >= 2, got {window}")
    if window >= length:
        raise WindowTooLargeError(window, length)
    half = window // 2
    positions = np.arange(half, length - half + 1, dtype=np.int64)
    values = np.array(
        [
            cost.cost(i - half, i + half)
            - cost.cost(i - half, i)
            - cost.cost(i, i + half)
            for i in positions.tolist()
        ],
        dtype=np.float64,
    )
    return positions, values


def _strict_local_maxima(values: np.ndarray, radius: int) -> np.ndarray:
    """Positions whose value beats every other value within +-radius."""
    padded = np.pad(values, radius, constant_values=-np.inf)
    windows = sliding_window_view(padded, 2 * radius + 1)
    left = windows[:, :radius].max(axis=1)
    right = windows[:, radius + 1 :].max(axis=1)
    return np.flatnonzero(values > np.maximum(left, right))


def window_detect(
    cost: ISegmentCost, window: int, rule: SelectionRule
) -> Changepoints:
    """Sliding-window changepoints.

    Peaks are strict local maxima of the discrepancy over a +-window/2
    neighbourhood; the selection rule decides which peaks to keep. The
    signal length T is always appended.
    """
    positions, values = discrepancy(cost, window)
    peaks = _strict_local_maxima(values, window // 2)
    chosen = rule.select(values, peaks)
    indices = tuple(int(i) for i in positions[chosen]) + (cost.length,)
    _LOGGER.debug(
        "Window T=%d w=%d: %d peaks, %d kept",
        cost.length,
        window,
        len(peaks),
        len(chosen),
    )
    return Changepoints(indices).validate(cost.length)
