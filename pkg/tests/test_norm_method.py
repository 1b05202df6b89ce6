"""Test the two-stage normalized-feature method."""

from __future__ import annotations

import numpy as np
import pytest

from symseg.exceptions import TooFewCandidatesError, TooFewNotesError
from symseg.models import Method, NormParams
from symseg.norm_method import (
    candidate_window,
    extract_features,
    ioi,
    local_direction,
    norm_analyze,
    norm_segment,
    peak_pick,
    round_half_up,
    segment_ssm,
    zscore,
)

from .conftest import TPQ, make_piece, melody, random_piece

PHRASE = [60, 62, 64, 65, 67, 65, 64, 62] * 2


def repeated_phrase():
    """A 16-note phrase, a four-beat rest, then the phrase again."""
    return make_piece(
        melody(PHRASE) + melody(PHRASE, start=20 * TPQ), source_path="phrase.csv"
    )


# ==============================================================================
# Features
# ==============================================================================


class TestFeatures:
    """Test per-gap features."""

    def test_ioi(self):
        """Test intervals are measured in beats."""
        piece = make_piece(melody([60, 62, 64]) + [(65, 4 * TPQ, 5 * TPQ)])
        assert ioi(piece).tolist() == [1.0, 1.0, 2.0]

    def test_ioi_chord(self):
        """Test simultaneous notes give a zero interval."""
        piece = make_piece([(60, 0, TPQ), (64, 0, TPQ), (67, TPQ, 2 * TPQ)])
        assert ioi(piece).tolist() == [0.0, 1.0]

    def test_direction(self):
        """Test up, repeat and down steps."""
        piece = make_piece(melody([60, 64, 64, 62]))
        assert local_direction(piece).tolist() == [1, 0, -1]

    def test_single_note(self):
        """Test features need two notes."""
        with pytest.raises(TooFewNotesError):
            ioi(make_piece(melody([60])))

    def test_extract(self):
        """Test combined is ioi plus direction."""
        features = extract_features(make_piece(melody([60, 62, 62, 60])))
        assert features.combined.tolist() == [2.0, 1.0, 0.0]
        np.testing.assert_allclose(features.normalized, zscore([2.0, 1.0, 0.0]))


class TestZscore:
    """Test zscore."""

    def test_values(self):
        """Test population standard deviation."""
        np.testing.assert_allclose(
            zscore(np.array([1.0, 2.0, 3.0])), [-1.224744871, 0.0, 1.224744871]
        )

    def test_flat(self):
        """Test a constant signal maps to zeros."""
        assert zscore(np.full(5, 3.0)).tolist() == [0.0] * 5

    def test_empty(self):
        """Test an empty signal stays empty."""
        assert len(zscore(np.array([]))) == 0


# ==============================================================================
# Peak picking
# ==============================================================================


class TestPeakPick:
    """Test thresholded local maxima."""

    def test_single_peak(self):
        """Test one spike."""
        assert peak_pick(np.array([0, 0, 5, 0, 0]), 1, 0.5).tolist() == [2]

    def test_two_spikes(self):
        """Test spikes further apart than the window both survive."""
        signal = np.zeros(14)
        signal[2], signal[10] = 5.0, 4.0
        assert peak_pick(signal, 3, 0.5).tolist() == [2, 10]

    def test_window_suppresses(self):
        """Test the smaller of two close spikes is dropped."""
        signal = np.zeros(14)
        signal[4], signal[6] = 5.0, 4.0
        assert peak_pick(signal, 3, 0.0).tolist() == [4]

    def test_plateau(self):
        """Test a plateau yields its first index only."""
        assert peak_pick(np.array([0, 3, 3, 0]), 1, 0.0).tolist() == [1]

    def test_threshold(self):
        """Test peaks below mean + tau * std are dropped."""
        assert peak_pick(np.array([0, 0, 5, 0, 0]), 1, 3.0).tolist() == []

    def test_flat(self):
        """Test a flat signal has no peaks."""
        assert peak_pick(np.ones(6), 2, 0.0).tolist() == []

    def test_bad_window(self):
        """Test window below 1."""
        with pytest.raises(ValueError):
            peak_pick(np.ones(3), 0, 0.0)


class TestWindowSize:
    """Test the note-count window rule."""

    @pytest.mark.parametrize(
        ("alpha", "n_notes", "expected"),
        [(0.6, 1000, 40), (0.6, 15, 1), (2.3, 1500, 230), (1.5, 25, 3), (0.1, 5, 1)],
    )
    def test_candidate_window(self, alpha, n_notes, expected):
        """Test proportional sizing with a floor of one."""
        assert candidate_window(alpha, n_notes) == expected

    def test_round_half_up(self):
        """Test halves round up rather than to even."""
        assert [round_half_up(v) for v in (0.5, 1.5, 2.5, 2.49)] == [1, 2, 3, 2]


# ==============================================================================
# Segment SSM
# ==============================================================================


class TestSegmentSsm:
    """Test the span distance matrix."""

    @pytest.mark.parametrize("combine", ["sum", "concat"])
    def test_matrix(self, combine):
        """Test spans with equal content are at distance zero."""
        piece = make_piece(melody([60, 62, 64, 62, 60, 62]))
        ssm = segment_ssm(piece, [2, 4], combine)
        np.testing.assert_allclose(
            ssm.matrix, [[0.0, 2.0, 0.0], [2.0, 0.0, 2.0], [0.0, 2.0, 0.0]]
        )
        assert ssm.size == 3

    def test_padding(self):
        """Test shorter spans are zero padded."""
        piece = make_piece(melody([60, 62, 64, 65, 67, 69]))
        ssm = segment_ssm(piece, [1, 2])
        assert [v.tolist() for v in ssm.segment_vectors] == [
            [0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0],
            [2.0, 2.0, 2.0],
        ]

    def test_too_few_candidates(self):
        """Test one candidate cannot form a matrix."""
        with pytest.raises(TooFewCandidatesError):
            segment_ssm(make_piece(melody([60, 62, 64, 65])), [2])

    def test_unknown_combine(self):
        """Test an unknown combine mode."""
        with pytest.raises(ValueError):
            segment_ssm(make_piece(melody([60, 62, 64, 65])), [1, 2], "product")


# ==============================================================================
# Full method
# ==============================================================================


class TestNormAnalyze:
    """Test both stages together."""

    def test_rest_between_phrases(self):
        """Test the long rest becomes the only candidate."""
        result = norm_analyze(repeated_phrase(), NormParams(0.6, 1.0, 1, 0.5))
        assert result.window == 1
        assert result.candidates == (16,)
        assert result.ssm is None
        assert result.refined == (16,)

    def test_second_stage(self):
        """Test refined boundaries come from the candidates."""
        result = norm_analyze(repeated_phrase(), NormParams(0.6, 0.5, 1, 0.0))
        assert len(result.candidates) >= 2
        assert 16 in result.candidates
        assert result.ssm is not None
        assert result.ssm.size == len(result.candidates) + 1
        assert len(result.ssm_novelty) == len(result.candidates)
        assert set(result.refined) <= set(result.candidates)

    def test_isochronous_unison(self):
        """Test an even single-pitch stream has no candidates."""
        piece = make_piece(melody([60] * 32))
        result = norm_analyze(piece, NormParams(0.6, 0.5, 2, 0.5))
        assert result.candidates == ()
        assert result.refined == ()

    def test_time_scale(self):
        """Test stretching a single-pitch rhythm keeps the candidates."""
        steps = [1, 1, 1, 3, 1, 1, 1, 1, 3, 1, 1, 2, 1, 1, 1, 3, 1, 1]
        onsets = np.cumsum([0, *steps]) * TPQ
        piece = make_piece((60, int(on), int(on) + TPQ) for on in onsets)
        stretched = make_piece(
            (60, 2 * int(on), 2 * (int(on) + TPQ)) for on in onsets
        )
        params = NormParams(0.6, 0.5, 1, 0.5)
        first = norm_analyze(piece, params)
        second = norm_analyze(stretched, params)
        assert first.candidates == second.candidates
        assert first.refined == second.refined

    def test_transposition_invariance(self, rng):
        """Test moving every pitch by the same interval keeps the boundaries."""
        params = NormParams(0.6, 0.5, 2, 0.5)
        for _ in range(100):
            piece = random_piece(rng, 40)
            transposed = make_piece(
                (n.pitch + 7, n.onset_ticks, n.offset_ticks) for n in piece.notes
            )
            first = norm_analyze(piece, params)
            second = norm_analyze(transposed, params)
            assert first.candidates == second.candidates
            assert first.refined == second.refined

    def test_too_few_notes(self):
        """Test three notes are not enough."""
        with pytest.raises(TooFewNotesError):
            norm_analyze(
                make_piece(melody([60, 62, 64])), NormParams(0.6, 0.5, 1, 0.5)
            )

    def test_norm_segment(self):
        """Test the segmentation carries refined and candidate boundaries."""
        params = NormParams(0.6, 1.0, 1, 0.5)
        segmentation = norm_segment(repeated_phrase(), params)
        assert segmentation.method_params.method is Method.NORM
        assert segmentation.method_params.norm == params
        assert segmentation.beats == [20.0, 36.0]
        assert segmentation.candidate_beats == [20.0, 36.0]
