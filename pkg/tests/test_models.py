"""Test symseg data models."""

from __future__ import annotations

from dataclasses import FrozenInstanceError
from fractions import Fraction
import pickle

import pytest

from symseg.exceptions import (
    IndexOutOfRangeError,
    InvalidNoteError,
    InvalidParamsError,
    TempoChangeError,
    TooFewNotesError,
)
from symseg.models import (
    Boundary,
    Method,
    MethodParams,
    Note,
    NormParams,
    Piece,
    PieceMetadata,
    Segmentation,
    TimingContext,
    note_time,
)
from symseg.models.segmentation import end_boundary, note_boundaries

from .conftest import make_piece, melody


# ==============================================================================
# Note Tests
# ==============================================================================


class TestNote:
    """Test Note model."""

    def test_defaults(self):
        """Test default velocity and track."""
        note = Note(pitch=60, onset_ticks=0, offset_ticks=480)
        assert note.velocity == 64
        assert note.track == 0
        assert note.duration_ticks == 480

    @pytest.mark.parametrize("pitch", [-1, 128])
    def test_pitch_range(self, pitch):
        """Test pitch outside 0-127 is rejected."""
        with pytest.raises(InvalidNoteError):
            Note(pitch=pitch, onset_ticks=0, offset_ticks=10)

    @pytest.mark.parametrize("offset", [0, -5])
    def test_offset_after_onset(self, offset):
        """Test zero and negative durations are rejected."""
        with pytest.raises(InvalidNoteError):
            Note(pitch=60, onset_ticks=0, offset_ticks=offset)

    def test_immutable(self):
        """Test that Note is frozen."""
        note = Note(pitch=60, onset_ticks=0, offset_ticks=480)
        with pytest.raises(FrozenInstanceError):
            note.pitch = 61


# ==============================================================================
# TimingContext Tests
# ==============================================================================


class TestTimingContext:
    """Test tick, beat and second conversion."""

    def test_exact_beats(self):
        """Test beats are exact fractions."""
        timing = TimingContext(ticks_per_quarter=480)
        assert timing.beats(720) == Fraction(3, 2)
        assert timing.beats(1) == Fraction(1, 480)

    def test_seconds_default_tempo(self):
        """Test 120 bpm default tempo."""
        timing = TimingContext(ticks_per_quarter=480)
        assert timing.seconds(480) == Fraction(1, 2)

    @pytest.mark.parametrize(
        ("meter", "expected"),
        [((4, 4), Fraction(4)), ((3, 8), Fraction(3, 2)), ((6, 8), Fraction(3))],
    )
    def test_bar_length(self, meter, expected):
        """Test bar length is counted in quarter-note beats."""
        timing = TimingContext(ticks_per_quarter=480, time_signature=meter)
        assert timing.bar_length_beats == expected

    def test_invalid_resolution(self):
        """Test non-positive resolution is rejected."""
        with pytest.raises(InvalidNoteError):
            TimingContext(ticks_per_quarter=0)


# ==============================================================================
# Piece Tests
# ==============================================================================


class TestPiece:
    """Test Piece model."""

    def test_sorted_by_onset_then_pitch(self):
        """Test from_notes orders by (onset, pitch)."""
        piece = make_piece([(67, 480, 960), (64, 0, 480), (60, 0, 480)])
        assert [n.pitch for n in piece.notes] == [60, 64, 67]
        assert piece.onsets.tolist() == [0, 0, 480]

    def test_duplicates_kept(self):
        """Test doubled notes are both kept."""
        piece = make_piece([(60, 0, 480), (60, 0, 480)])
        assert piece.n_notes == 2

    def test_duration(self):
        """Test duration runs to the latest offset."""
        piece = make_piece([(60, 0, 1920), (62, 480, 960)])
        assert piece.end_ticks == 1920
        assert piece.duration_beats == 4

    def test_note_time(self):
        """Test tick 480 at 120 bpm is one beat and half a second."""
        piece = make_piece([(60, 0, 480), (62, 480, 960)])
        assert note_time(piece, 1) == (1.0, 0.5)
        assert piece.note_time(0) == (0.0, 0.0)

    @pytest.mark.parametrize("index", [-1, 2])
    def test_note_time_out_of_range(self, index):
        """Test indices outside [0, N) raise."""
        piece = make_piece([(60, 0, 480), (62, 480, 960)])
        with pytest.raises(IndexOutOfRangeError):
            note_time(piece, index)

    def test_index_error_is_index_error(self):
        """Test IndexOutOfRangeError is also a builtin IndexError."""
        piece = make_piece([(60, 0, 480)])
        with pytest.raises(IndexError):
            note_time(piece, 5)

    def test_metadata_defaults(self):
        """Test a fresh piece has clean metadata."""
        piece = make_piece([(60, 0, 480)])
        assert piece.metadata == PieceMetadata()
        assert piece.metadata.as_dict()["origin_beats"] == "0"


# ==============================================================================
# Parameter Tests
# ==============================================================================


class TestMethodParams:
    """Test MethodParams validation and serialization."""

    def test_g_pelt_valid(self):
        """Test SWD G-PELT parameters validate."""
        MethodParams(Method.G_PELT, alpha=0.6, beta=0.15, penalty=0.7).validate()

    @pytest.mark.parametrize(
        "params",
        [
            MethodParams(Method.G_PELT, alpha=0.0, beta=0.15, penalty=0.7),
            MethodParams(Method.G_PELT, alpha=0.6, beta=None, penalty=0.7),
            MethodParams(Method.G_WINDOW, alpha=1.0, penalty=-0.1),
            MethodParams(Method.NORM),
            MethodParams(Method.BASELINE, k=0),
        ],
    )
    def test_invalid(self, params):
        """Test missing or out-of-range parameters raise."""
        with pytest.raises(InvalidParamsError):
            params.validate()

    def test_params_dict_order(self):
        """Test params_dict keeps a fixed key order per method."""
        pelt = MethodParams(Method.G_PELT, alpha=0.6, beta=0.15, penalty=0.7)
        window = MethodParams(Method.G_WINDOW, alpha=1.0, penalty=0.5)
        assert list(pelt.params_dict) == ["alpha", "beta", "penalty"]
        assert list(window.params_dict) == ["alpha", "penalty"]

    def test_norm_from_dict(self):
        """Test Norm params rebuild from a params dict."""
        params = MethodParams.from_dict(
            "norm", {"alpha1": 0.6, "tau1": 1, "w2": 2, "tau2": 0.5}
        )
        assert params.norm == NormParams(alpha1=0.6, tau1=1.0, w2=2, tau2=0.5)


# ==============================================================================
# Segmentation Tests
# ==============================================================================


class TestSegmentation:
    """Test Segmentation construction and JSON form."""

    def test_from_note_indices_appends_end(self):
        """Test the end-of-piece boundary is always appended."""
        piece = make_piece(melody([60, 62, 64, 65]), source_path="a.csv")
        params = MethodParams(Method.G_PELT, alpha=0.6, beta=0.15, penalty=0.7)
        seg = Segmentation.from_note_indices(piece, [2], params)
        assert seg.beats == [2.0, 4.0]
        assert seg.boundaries[-1].note_index == 4
        assert seg.includes_final
        assert seg.piece_ref == "a.csv"

    def test_candidates(self):
        """Test candidates also end with the final boundary."""
        piece = make_piece(melody([60, 62, 64, 65]))
        norm = MethodParams(Method.NORM, norm=NormParams(0.6, 1.0, 2, 0.5))
        seg = Segmentation.from_note_indices(piece, [2], norm, candidate_indices=[1, 2])
        assert seg.candidate_beats == [1.0, 2.0, 4.0]

    def test_note_boundaries_sorted_unique(self):
        """Test indices are sorted and deduplicated."""
        piece = make_piece(melody([60, 62, 64, 65]))
        boundaries = note_boundaries(piece, [3, 1, 3])
        assert [b.note_index for b in boundaries] == [1, 3]

    def test_note_boundaries_out_of_range(self):
        """Test an index past the last note raises."""
        piece = make_piece(melody([60, 62]))
        with pytest.raises(IndexOutOfRangeError):
            note_boundaries(piece, [2])

    def test_end_boundary(self):
        """Test the end boundary sits at the latest offset."""
        piece = make_piece([(60, 0, 1920), (62, 480, 960)])
        assert end_boundary(piece) == Boundary(note_index=2, beat=4.0, second=2.0)

    def test_json_round_trip(self):
        """Test as_dict/from_dict restore an equal Segmentation."""
        piece = make_piece(melody([60, 62, 64, 65]), time_signature=(3, 4))
        params = MethodParams(Method.G_WINDOW, alpha=1.0, penalty=0.5)
        seg = Segmentation.from_note_indices(piece, [1, 3], params)
        restored = Segmentation.from_dict(seg.as_dict())
        assert restored == seg
        assert restored.time_signature == (3, 4)

    def test_key_order(self):
        """Test JSON keys keep a stable order."""
        piece = make_piece(melody([60, 62]))
        params = MethodParams(Method.BASELINE, k=1)
        seg = Segmentation.from_note_indices(piece, [], params)
        assert list(seg.as_dict()) == [
            "source",
            "method",
            "params",
            "time_signature",
            "includes_final",
            "boundaries",
        ]


# ==============================================================================
# Exception Tests
# ==============================================================================


class TestExceptions:
    """Test exceptions survive worker-process pickling."""

    @pytest.mark.parametrize(
        "error",
        [
            TempoChangeError([500000, 600000], source="x.mid"),
            TooFewNotesError(4, 2, source="y.csv"),
            IndexOutOfRangeError(3, 2),
        ],
    )
    def test_pickle(self, error):
        """Test message and attributes round-trip through pickle."""
        restored = pickle.loads(pickle.dumps(error))
        assert type(restored) is type(error)
        assert str(restored) == str(error)
        assert restored.__dict__ == error.__dict__


def test_piece_is_frozen():
    """Test Piece is immutable."""
    piece = Piece.from_notes([], TimingContext(ticks_per_quarter=480))
    with pytest.raises(FrozenInstanceError):
        piece.source_path = "other"
