"""Domain models for symseg.

All models are frozen dataclasses for immutability.
"""

from .evaluation import (
    AggregateScore,
    Annotation,
    BeatErrorHistogram,
    EvalReport,
    FileScore,
    Level,
    Matching,
    ToleranceKind,
)
from .features import FeatureVector, NormResult, SegmentSSM
from .graph import (
    AdjacencyMatrix,
    Edge,
    EdgeKind,
    NoteGraph,
    NoveltySignal,
    NoveltySource,
)
from .note import Note, Piece, PieceMetadata, TimingContext, note_time
from .segmentation import Boundary, Method, MethodParams, NormParams, Segmentation

__all__ = [
    # Notes
    "Note",
    "Piece",
    "PieceMetadata",
    "TimingContext",
    "note_time",
    # Graph
    "AdjacencyMatrix",
    "Edge",
    "EdgeKind",
    "NoteGraph",
    "NoveltySignal",
    "NoveltySource",
    # Features
    "FeatureVector",
    "NormResult",
    "SegmentSSM",
    # Segmentation
    "Boundary",
    "Method",
    "MethodParams",
    "NormParams",
    "Segmentation",
    # Evaluation
    "AggregateScore",
    "Annotation",
    "BeatErrorHistogram",
    "EvalReport",
    "FileScore",
    "Level",
    "Matching",
    "ToleranceKind",
]
