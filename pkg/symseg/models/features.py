"""Feature models of the two-stage normalized-feature method."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Per-gap features of a piece, all of length N - 1.

    ioi is in beats, direction in {-1, 0, 1}; combined = ioi + direction
    and normalized is its z-score.
    """

    ioi: np.ndarray
    direction: np.ndarray
    combined: np.ndarray
    normalized: np.ndarray


@dataclass(frozen=True, eq=False)
class SegmentSSM:
    """Distance matrix between zero-padded span feature vectors."""

    matrix: np.ndarray
    segment_vectors: tuple[np.ndarray, ...]

    @property
    def size(self) -> int:
        """Number of spans (candidates + 1)."""
        return int(self.matrix.shape[0])


@dataclass(frozen=True, eq=False)
class NormResult:
    """Intermediate and final outputs of one run.

    candidates and refined are note indices of boundary notes, without
    the end-of-piece boundary.
    """

    features: FeatureVector
    window: int
    candidates: tuple[int, ...]
    ssm: SegmentSSM | None
    ssm_novelty: np.ndarray | None
    refined: tuple[int, ...]
