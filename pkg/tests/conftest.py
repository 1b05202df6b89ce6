"""Test fixtures for symseg tests."""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from fractions import Fraction
import itertools
import os
from pathlib import Path
import struct

import numpy as np
import pytest

from symseg.models import Note, Piece, TimingContext
from symseg.parsers import write_note_csv

TPQ = 480

# (pitch, onset_ticks, offset_ticks)
NoteSpec = tuple[int, int, int]


# ==============================================================================
# Standard MIDI File builder
# ==============================================================================


def vlq(value: int) -> bytes:
    """Variable-length quantity encoding of a delta time."""
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


def note_events(
    notes: Iterable[NoteSpec], channel: int = 0, velocity: int = 80
) -> list[tuple[int, bytes]]:
    """Absolute-time note-on/note-off events for (pitch, onset, offset) specs."""
    events = []
    for pitch, onset, offset in notes:
        events.append((onset, bytes([0x90 | channel, pitch, velocity])))
        events.append((offset, bytes([0x80 | channel, pitch, 0])))
    return events


def tempo_event(tick: int, us_per_quarter: int) -> tuple[int, bytes]:
    """set_tempo meta event."""
    return tick, b"\xff\x51\x03" + us_per_quarter.to_bytes(3, "big")


def time_signature_event(
    tick: int, numerator: int, denominator: int
) -> tuple[int, bytes]:
    """time_signature meta event."""
    power = denominator.bit_length() - 1
    return tick, bytes([0xFF, 0x58, 0x04, numerator, power, 24, 8])


def track_chunk(events: Iterable[tuple[int, bytes]]) -> bytes:
    """MTrk chunk from absolute-time events; note-offs sort before note-ons."""

    def order(event: tuple[int, bytes]) -> tuple[int, int]:
        tick, data = event
        return tick, 0 if data[0] & 0xF0 == 0x80 else 1

    body = b""
    last = 0
    for tick, data in sorted(events, key=order):
        body += vlq(tick - last) + data
        last = tick
    body += b"\x00\xff\x2f\x00"
    return b"MTrk" + struct.pack(">L", len(body)) + body


def smf_bytes(
    tracks: Sequence[Iterable[tuple[int, bytes]]],
    ticks_per_quarter: int = TPQ,
    fmt: int | None = None,
) -> bytes:
    """Complete SMF; format 0 for one track, 1 otherwise unless given."""
    if fmt is None:
        fmt = 0 if len(tracks) == 1 else 1
    header = b"MThd" + struct.pack(">LHHH", 6, fmt, len(tracks), ticks_per_quarter)
    return header + b"".join(track_chunk(events) for events in tracks)


# ==============================================================================
# Pieces
# ==============================================================================


def make_piece(
    notes: Iterable[NoteSpec],
    ticks_per_quarter: int = TPQ,
    time_signature: tuple[int, int] = (4, 4),
    source_path: str = "",
) -> Piece:
    """Piece from (pitch, onset, offset) tick specs."""
    return Piece.from_notes(
        [Note(pitch=p, onset_ticks=on, offset_ticks=off) for p, on, off in notes],
        TimingContext(
            ticks_per_quarter=ticks_per_quarter, time_signature=time_signature
        ),
        source_path=source_path,
    )


def melody(pitches: Sequence[int], start: int = 0, step: int = TPQ) -> list[NoteSpec]:
    """Monophonic line of equal notes."""
    return [
        (p, start + i * step, start + (i + 1) * step) for i, p in enumerate(pitches)
    ]


def two_section_specs() -> list[NoteSpec]:
    """60 notes of three-note chords, then a 60-note monophonic line."""
    specs: list[NoteSpec] = []
    for k in range(20):
        for pitch in (48, 55, 64):
            specs.append((pitch + k % 3, k * TPQ, (k + 1) * TPQ))
    line = [60, 62, 64, 65, 67, 69, 71, 72] * 8
    specs.extend(melody(line[:60], start=20 * TPQ))
    return specs


def random_piece(rng: np.random.Generator, n_notes: int) -> Piece:
    """Random polyphony on a coarse grid, so equalities actually occur."""
    onsets = np.sort(rng.integers(0, n_notes * 2, size=n_notes)) * 120
    lengths = rng.integers(1, 6, size=n_notes) * 120
    pitches = rng.integers(40, 90, size=n_notes)
    return make_piece(
        (int(p), int(on), int(on + length))
        for p, on, length in zip(pitches, onsets, lengths)
    )


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator for property-style loops."""
    return np.random.default_rng(20240611)


@pytest.fixture
def piece_factory() -> Callable[..., Piece]:
    """Factory building pieces from (pitch, onset, offset) specs."""
    return make_piece


@pytest.fixture
def two_section_piece() -> Piece:
    """Dense chordal texture changing to sparse monophony at note 60."""
    return make_piece(two_section_specs(), source_path="two_section.csv")


@pytest.fixture
def scale_piece() -> Piece:
    """Sixteen ascending notes, one beat each."""
    return make_piece(melody(range(60, 76)), source_path="scale.csv")


@pytest.fixture
def write_piece(tmp_path: Path) -> Callable[[Piece, str], Path]:
    """Write a piece as note CSV under tmp_path and return the path."""

    def write(piece: Piece, name: str) -> Path:
        path = tmp_path / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(write_note_csv(piece), encoding="utf-8")
        return path

    return write


# ==============================================================================
# Changepoint oracles
# ==============================================================================


# Relative tolerance for objective ties, matching the detector.
TIE_RTOL = 1e-9

# (objective, changepoint indices ending at T)
Optimum = tuple[float, tuple[int, ...]]


def direct_cost(signal: np.ndarray, gamma: float, start: int, end: int) -> float:
    """Kernel cost of [start, end) from an explicit Gram block."""
    block = signal[start:end]
    gram = np.exp(-gamma * np.subtract.outer(block, block) ** 2)
    return float(len(block) - gram.sum() / len(block))


def objective(
    signal: np.ndarray, gamma: float, indices: Sequence[int], penalty: float
) -> float:
    """Total cost plus penalty per interior changepoint."""
    bounds = [0, *indices]
    total = sum(
        direct_cost(signal, gamma, a, b) for a, b in zip(bounds[:-1], bounds[1:])
    )
    return total + penalty * (len(indices) - 1)


def tie_ruled(options: Iterable[Optimum]) -> Optimum:
    """Best option: lowest objective, then most changepoints, then earliest."""
    candidates = list(options)
    low = min(score for score, _ in candidates)
    tied = [
        option
        for option in candidates
        if option[0] <= low + TIE_RTOL * max(1.0, abs(low))
    ]
    return min(tied, key=lambda option: (-len(option[1]), option[1]))


def exhaustive_optimum(
    signal: np.ndarray, gamma: float, min_size: int, jump: int, penalty: float
) -> Optimum:
    """Best segmentation by enumerating every admissible one."""
    length = len(signal)
    grid = [t for t in range(min_size, length - min_size + 1) if t % jump == 0]
    options = [(objective(signal, gamma, [length], penalty), (length,))]
    for count in range(1, len(grid) + 1):
        for interior in itertools.combinations(grid, count):
            bounds = [0, *interior, length]
            if any(b - a < min_size for a, b in zip(bounds[:-1], bounds[1:])):
                continue
            indices = (*interior, length)
            options.append((objective(signal, gamma, indices, penalty), indices))
    return tie_ruled(options)


def optimal_partitioning(
    signal: np.ndarray, gamma: float, min_size: int, jump: int, penalty: float
) -> Optimum:
    """Best segmentation by unpruned dynamic programming."""
    length = len(signal)
    if length < 2 * min_size:
        return direct_cost(signal, gamma, 0, length), (length,)
    ends = [t for t in range(min_size, length - min_size + 1) if t % jump == 0]
    ends.append(length)
    best: dict[int, Optimum] = {0: (-penalty, ())}
    for end in ends:
        best[end] = tie_ruled(
            (score + direct_cost(signal, gamma, tau, end) + penalty, (*path, end))
            for tau, (score, path) in best.items()
            if end - tau >= min_size
        )
    return best[length]


@pytest.fixture
def pelt_oracle() -> Callable[..., Optimum]:
    """Exact penalized optimum; enumeration for short signals, DP otherwise."""

    def oracle(
        signal: np.ndarray, gamma: float, min_size: int, jump: int, penalty: float
    ) -> Optimum:
        if len(signal) <= 12:
            return exhaustive_optimum(signal, gamma, min_size, jump, penalty)
        return optimal_partitioning(signal, gamma, min_size, jump, penalty)

    return oracle


# ==============================================================================
# Datasets
# ==============================================================================


def dataset_dir(variable: str) -> Path:
    """Dataset root from the environment, or skip the test."""
    value = os.environ.get(variable)
    if not value or not Path(value).is_dir():
        pytest.skip(f"{variable} not set")
    return Path(value)


def beats(value: float | str) -> Fraction:
    """Exact beat value for test tables."""
    return Fraction(str(value))
