"""Test note graph construction, adjacency and novelty."""

from __future__ import annotations

import math

import numpy as np
import pytest

from symseg.exceptions import CapacityExceededError, MatrixTooSmallError
from symseg.graph import adjacency, build_graph, novelty
from symseg.models import Edge, EdgeKind, NoveltySource, Piece

from .conftest import make_piece, random_piece


def brute_force_edges(piece: Piece, tolerance: int = 0) -> set[Edge]:
    """Edge set by checking every ordered pair against the predicates."""
    edges = set()
    notes = piece.notes
    for i, a in enumerate(notes):
        for j, b in enumerate(notes):
            if i == j:
                continue
            low, high = min(i, j), max(i, j)
            if a.onset_ticks == b.onset_ticks:
                edges.add(Edge(low, high, EdgeKind.ONSET))
            if abs(a.offset_ticks - b.onset_ticks) <= tolerance:
                edges.add(Edge(low, high, EdgeKind.CONSECUTIVE))
            if a.offset_ticks > b.onset_ticks and a.onset_ticks < b.onset_ticks:
                edges.add(Edge(low, high, EdgeKind.OVERLAP))
    return edges


# ==============================================================================
# Graph construction
# ==============================================================================


class TestBuildGraph:
    """Test edge predicates."""

    def test_onset_edge(self):
        """Test two notes with one onset share an Onset edge."""
        graph = build_graph(make_piece([(60, 0, 480), (64, 0, 960)]))
        assert graph.edge_set() == {Edge(0, 1, EdgeKind.ONSET)}

    def test_consecutive_edge(self):
        """Test a note starting where another ends."""
        graph = build_graph(make_piece([(60, 0, 480), (62, 480, 960)]))
        assert graph.edge_set() == {Edge(0, 1, EdgeKind.CONSECUTIVE)}

    def test_overlap_edge(self):
        """Test a note starting inside a sounding note."""
        graph = build_graph(make_piece([(60, 0, 960), (64, 480, 720)]))
        assert graph.edge_set() == {Edge(0, 1, EdgeKind.OVERLAP)}

    def test_empty_and_single(self):
        """Test pieces with fewer than two notes have no edges."""
        assert build_graph(make_piece([])).edge_count == 0
        assert build_graph(make_piece([(60, 0, 480)])).edge_count == 0

    def test_tick_tolerance(self):
        """Test consecutive slack applies within the tolerance only."""
        piece = make_piece([(60, 0, 470), (62, 480, 960)])
        assert build_graph(piece).edge_count == 0
        graph = build_graph(piece, tick_tolerance=10)
        assert graph.edge_set() == {Edge(0, 1, EdgeKind.CONSECUTIVE)}

    def test_matches_brute_force(self, rng):
        """Test the edge set equals an exhaustive predicate check."""
        for _ in range(200):
            piece = random_piece(rng, int(rng.integers(2, 60)))
            assert build_graph(piece).edge_set() == brute_force_edges(piece)

    def test_matches_brute_force_with_tolerance(self, rng):
        """Test the tolerant Consecutive predicate against brute force."""
        for _ in range(50):
            piece = random_piece(rng, int(rng.integers(2, 40)))
            graph = build_graph(piece, tick_tolerance=120)
            assert graph.edge_set() == brute_force_edges(piece, 120)

    def test_time_shift_invariance(self, rng):
        """Test translating every note leaves the graph unchanged."""
        for _ in range(100):
            piece = random_piece(rng, 30)
            shifted = make_piece(
                (n.pitch, n.onset_ticks + 960, n.offset_ticks + 960)
                for n in piece.notes
            )
            assert build_graph(shifted).edge_set() == build_graph(piece).edge_set()


# ==============================================================================
# Adjacency
# ==============================================================================


class TestAdjacency:
    """Test the adjacency matrix."""

    def test_single_edge(self):
        """Test one Onset edge between two notes."""
        matrix = adjacency(build_graph(make_piece([(60, 0, 480), (64, 0, 480)])))
        np.testing.assert_array_equal(matrix.data, [[0, 1], [1, 0]])

    def test_edgeless(self):
        """Test an edgeless graph gives a zero matrix."""
        piece = make_piece([(60, 0, 100), (62, 480, 580), (64, 960, 1060)])
        matrix = adjacency(build_graph(piece))
        np.testing.assert_array_equal(matrix.data, np.zeros((3, 3)))

    def test_mixed_kinds(self):
        """Test each pair carries the kind of its relation."""
        piece = make_piece([(60, 0, 480), (64, 0, 960), (67, 480, 960)])
        assert build_graph(piece).edge_set() == {
            Edge(0, 1, EdgeKind.ONSET),
            Edge(0, 2, EdgeKind.CONSECUTIVE),
            Edge(1, 2, EdgeKind.OVERLAP),
        }
        matrix = adjacency(build_graph(piece))
        np.testing.assert_array_equal(matrix.data, 1 - np.eye(3))

    def test_multi_kind_pair_capped(self):
        """Test a pair linked by two kinds stays at 1 in the binary matrix."""
        piece = make_piece([(60, 0, 480), (64, 0, 480)])
        graph = build_graph(piece, tick_tolerance=480)
        kinds = {edge.kind for edge in graph.edge_set()}
        assert kinds == {EdgeKind.ONSET, EdgeKind.CONSECUTIVE}
        assert adjacency(graph).data[0, 1] == 1.0

    def test_weighted(self):
        """Test kind weights add up and are capped."""
        piece = make_piece([(60, 0, 480), (64, 0, 480)])
        graph = build_graph(piece, tick_tolerance=480)
        weights = {EdgeKind.ONSET: 0.5, EdgeKind.CONSECUTIVE: 2.0}
        assert adjacency(graph, weights=weights, cap=10.0).data[0, 1] == 2.5
        assert adjacency(graph, weights=weights, cap=1.0).data[0, 1] == 1.0

    def test_symmetric_zero_diagonal(self, rng):
        """Test symmetry and zero diagonal on random pieces."""
        for _ in range(50):
            matrix = adjacency(build_graph(random_piece(rng, 40)))
            assert matrix.is_symmetric
            assert matrix.has_zero_diagonal

    def test_capacity(self):
        """Test the note limit guards the allocation."""
        piece = make_piece([(60, i * 10, i * 10 + 5) for i in range(5)])
        with pytest.raises(CapacityExceededError) as err:
            adjacency(build_graph(piece), max_notes=4)
        assert err.value.limit == 4


# ==============================================================================
# Novelty
# ==============================================================================


class TestNovelty:
    """Test row-difference novelty."""

    def test_identity(self):
        """Test consecutive unit rows are sqrt(2) apart."""
        values = novelty(np.eye(3)).values
        np.testing.assert_allclose(values, [math.sqrt(2), math.sqrt(2)])

    def test_constant(self):
        """Test identical rows give zero novelty."""
        np.testing.assert_array_equal(novelty(np.ones((4, 4))).values, np.zeros(3))

    def test_two_by_two(self):
        """Test the swap matrix."""
        np.testing.assert_allclose(
            novelty(np.array([[0, 1], [1, 0]])).values, [math.sqrt(2)]
        )

    def test_repeated_last_row(self, rng):
        """Test a copy of the last row appends a zero."""
        matrix = rng.random((5, 5))
        extended = np.zeros((6, 6))
        extended[:5, :5] = matrix
        extended[5, :5] = matrix[-1]
        values = novelty(extended).values
        np.testing.assert_allclose(values[:-1], novelty(matrix).values)
        assert values[-1] == 0.0

    def test_source_tag(self):
        """Test the source of the matrix is recorded."""
        assert novelty(np.eye(2), NoveltySource.SSM).source is NoveltySource.SSM

    @pytest.mark.parametrize("matrix", [np.zeros((1, 1)), np.zeros((2, 3))])
    def test_too_small(self, matrix):
        """Test non-square or 1x1 input."""
        with pytest.raises(MatrixTooSmallError):
            novelty(matrix)
