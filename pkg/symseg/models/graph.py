"""Note graph, adjacency matrix and novelty signal models."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np


class EdgeKind(Enum):
    """Undirected relation between two notes."""

    ONSET = "onset"  # same onset
    CONSECUTIVE = "consecutive"  # off(i) == on(j)
    OVERLAP = "overlap"  # on(i) < on(j) < off(i)


class NoveltySource(Enum):
    """Matrix a novelty signal was derived from."""

    ADJACENCY = "adjacency"
    SSM = "ssm"


class Edge(NamedTuple):
    """Undirected edge stored with i < j."""

    i: int
    j: int
    kind: EdgeKind


def _empty_pairs() -> np.ndarray:
    return np.empty((0, 2), dtype=np.int64)


@dataclass(frozen=True, eq=False)
class NoteGraph:
    """Undirected note graph.

    Edges are kept per kind as (E, 2) int arrays of (i, j) with i < j,
    each pair listed once per kind. Kinds are not exclusive: two notes
    can share an ONSET and a CONSECUTIVE edge.
    """

    node_count: int
    onset: np.ndarray = field(default_factory=_empty_pairs)
    consecutive: np.ndarray = field(default_factory=_empty_pairs)
    overlap: np.ndarray = field(default_factory=_empty_pairs)

    def pairs(self, kind: EdgeKind) -> np.ndarray:
        """Edge endpoints for one kind."""
        if kind is EdgeKind.ONSET:
            return self.onset
        if kind is EdgeKind.CONSECUTIVE:
            return self.consecutive
        return self.overlap

    @property
    def edge_count(self) -> int:
        """Total number of (i, j, kind) edges."""
        return sum(len(self.pairs(kind)) for kind in EdgeKind)

    def edge_set(self) -> frozenset[Edge]:
        """All edges as a set of (i, j, kind) tuples."""
        return frozenset(
            Edge(int(i), int(j), kind)
            for kind in EdgeKind
            for i, j in self.pairs(kind)
        )


@dataclass(frozen=True, eq=False)
class AdjacencyMatrix:
    """Symmetric N x N adjacency matrix with a zero diagonal."""

    n: int
    data: np.ndarray

    @property
    def is_symmetric(self) -> bool:
        """True when data equals its transpose."""
        return bool(np.array_equal(self.data, self.data.T))

    @property
    def has_zero_diagonal(self) -> bool:
        """True when no node is connected to itself."""
        return not np.any(np.diagonal(self.data))


@dataclass(frozen=True, eq=False)
class NoveltySignal:
    """Distances between consecutive matrix rows, length n - 1."""

    values: np.ndarray
    source: NoveltySource = NoveltySource.ADJACENCY

    def __len__(self) -> int:
        return len(self.values)
