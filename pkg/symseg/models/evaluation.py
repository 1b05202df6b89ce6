"""Evaluation models: annotations, matchings and reports."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from ..const import TOLERANCE_ONE_BAR, TOLERANCE_ONE_BEAT


class Level(Enum):
    """Structure level of an annotation."""

    LOW = "low"
    MID = "mid"
    HIGH = "high"


class ToleranceKind(Enum):
    """Matching tolerance unit."""

    ONE_BEAT = TOLERANCE_ONE_BEAT
    ONE_BAR = TOLERANCE_ONE_BAR


@dataclass(frozen=True)
class Annotation:
    """Reference boundaries of one piece at one level.

    The piece start is not a boundary; the piece end is.
    """

    source: str
    level: Level
    boundaries_beats: tuple[float, ...]


@dataclass(frozen=True)
class Matching:
    """One-to-one matching between reference and estimated boundaries."""

    pairs: tuple[tuple[int, int], ...]
    precision: float
    recall: float
    f1: float
    n_ref: int
    n_est: int
    reference_empty: bool = False
    estimate_empty: bool = False

    @property
    def hits(self) -> int:
        """Matched boundary count |M|."""
        return len(self.pairs)


@dataclass(frozen=True)
class FileScore:
    """Scores of one file."""

    file: str
    precision: float
    recall: float
    f1: float
    n_ref: int
    n_est: int
    tolerance_beats: float
    reference_empty: bool = False
    estimate_empty: bool = False

    def as_dict(self) -> dict[str, Any]:
        """Serialize for the JSON report."""
        return {
            "file": self.file,
            "P": self.precision,
            "R": self.recall,
            "F1": self.f1,
            "n_ref": self.n_ref,
            "n_est": self.n_est,
            "tolerance_beats": self.tolerance_beats,
            "reference_empty": self.reference_empty,
            "estimate_empty": self.estimate_empty,
        }


@dataclass(frozen=True)
class AggregateScore:
    """Macro-averaged scores with population standard deviations."""

    p_mean: float = 0.0
    p_std: float = 0.0
    r_mean: float = 0.0
    r_std: float = 0.0
    f1_mean: float = 0.0
    f1_std: float = 0.0

    def as_dict(self) -> dict[str, float]:
        """Serialize for the JSON report."""
        return {
            "P_mean": self.p_mean,
            "P_std": self.p_std,
            "R_mean": self.r_mean,
            "R_std": self.r_std,
            "F1_mean": self.f1_mean,
            "F1_std": self.f1_std,
        }

    @property
    def summary(self) -> str:
        """One-line P/R/F1 summary."""
        return f"P={self.p_mean:.4f} R={self.r_mean:.4f} F1={self.f1_mean:.4f}"


@dataclass(frozen=True)
class EvalReport:
    """Per-file and aggregate scores at one tolerance."""

    per_file: tuple[FileScore, ...]
    aggregate: AggregateScore
    tolerance: ToleranceKind
    tolerance_beats: float | None = None
    unpaired: tuple[str, ...] = field(default_factory=tuple)

    def as_dict(self) -> dict[str, Any]:
        """Serialize for the JSON report."""
        return {
            "tolerance": self.tolerance.value,
            "tolerance_beats": self.tolerance_beats,
            "aggregate": self.aggregate.as_dict(),
            "per_file": [score.as_dict() for score in self.per_file],
            "unpaired": list(self.unpaired),
        }


@dataclass(frozen=True)
class BeatErrorHistogram:
    """Counts of estimate-to-nearest-reference distances in beats."""

    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]

    @property
    def total(self) -> int:
        """Number of estimates counted."""
        return sum(self.counts)
