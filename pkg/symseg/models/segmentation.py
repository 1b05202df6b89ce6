"""Segmentation result and method parameter models.

Parameters and results serialize themselves to JSON with a stable key
order, so saved results can be diffed.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any

from ..const import METHOD_BASELINE, METHOD_G_PELT, METHOD_G_WINDOW, METHOD_NORM
from ..exceptions import IndexOutOfRangeError, InvalidParamsError
from .note import Piece


class Method(Enum):
    """Segmentation method."""

    NORM = METHOD_NORM
    G_PELT = METHOD_G_PELT
    G_WINDOW = METHOD_G_WINDOW
    BASELINE = METHOD_BASELINE


@dataclass(frozen=True)
class NormParams:
    """Parameters of the two-stage Norm method."""

    alpha1: float
    tau1: float
    w2: int
    tau2: float

    def validate(self) -> None:
        """Raise InvalidParamsError for out-of-range values."""
        if self.alpha1 <= 0:
            raise InvalidParamsError(f"alpha1 must be > 0, got {self.alpha1}")
        if self.w2 < 1:
            raise InvalidParamsError(f"w2 must be >= 1, got {self.w2}")

    def as_dict(self) -> dict[str, Any]:
        """Serialize in declaration order."""
        return {
            "alpha1": self.alpha1,
            "tau1": self.tau1,
            "w2": self.w2,
            "tau2": self.tau2,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> NormParams:
        """Create from a params dict."""
        return cls(
            alpha1=float(data["alpha1"]),
            tau1=float(data["tau1"]),
            w2=int(data["w2"]),
            tau2=float(data["tau2"]),
        )


@dataclass(frozen=True)
class MethodParams:
    """Method selection plus its parameters.

    alpha/penalty drive G-PELT and G-Window, beta only G-PELT,
    norm only Norm, k only the equidistant baseline.
    """

    method: Method
    alpha: float | None = None
    beta: float | None = None
    penalty: float | None = None
    norm: NormParams | None = None
    k: int | None = None

    def validate(self) -> None:
        """Check that the fields the method needs are present and valid.

        Raises:
            InvalidParamsError: Missing or out-of-range parameter.
        """
        if self.method is Method.NORM:
            if self.norm is None:
                raise InvalidParamsError("Norm requires norm parameters")
            self.norm.validate()
            return

        if self.method is Method.BASELINE:
            if self.k is None or self.k < 1:
                raise InvalidParamsError(f"Baseline requires k >= 1, got {self.k}")
            return

        if self.alpha is None or self.alpha <= 0:
            raise InvalidParamsError(f"alpha must be > 0, got {self.alpha}")
        if self.penalty is None or self.penalty < 0:
            raise InvalidParamsError(f"penalty must be >= 0, got {self.penalty}")
        if self.method is Method.G_PELT and (self.beta is None or self.beta <= 0):
            raise InvalidParamsError(f"beta must be > 0, got {self.beta}")

    @property
    def params_dict(self) -> dict[str, Any]:
        """Parameters relevant to the method, in a fixed order."""
        if self.method is Method.NORM:
            return self.norm.as_dict() if self.norm else {}
        if self.method is Method.BASELINE:
            return {"k": self.k}
        params: dict[str, Any] = {"alpha": self.alpha}
        if self.method is Method.G_PELT:
            params["beta"] = self.beta
        params["penalty"] = self.penalty
        return params

    @classmethod
    def from_dict(cls, method: str, params: dict[str, Any]) -> MethodParams:
        """Create from the method name and params dict of a result JSON."""
        kind = Method(method)
        if kind is Method.NORM:
            return cls(method=kind, norm=NormParams.from_dict(params))
        if kind is Method.BASELINE:
            return cls(method=kind, k=int(params["k"]))
        beta = params.get("beta")
        return cls(
            method=kind,
            alpha=float(params["alpha"]),
            beta=float(beta) if beta is not None else None,
            penalty=float(params["penalty"]),
        )


@dataclass(frozen=True)
class Boundary:
    """A predicted boundary: the onset of the note starting a segment.

    note_index is N for the end-of-file boundary and None for
    synthetic baseline boundaries.
    """

    note_index: int | None
    beat: float
    second: float

    def as_dict(self) -> dict[str, Any]:
        """Serialize in declaration order."""
        return {
            "note_index": self.note_index,
            "beat": self.beat,
            "second": self.second,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Boundary:
        """Create from a boundary dict."""
        index = data.get("note_index")
        return cls(
            note_index=int(index) if index is not None else None,
            beat=float(data["beat"]),
            second=float(data["second"]),
        )


@dataclass(frozen=True)
class Segmentation:
    """Ordered boundaries of one piece with parameter provenance.

    For Norm, boundaries hold the refined b' and candidates the
    stage-one b; both end with the final boundary when includes_final
    is set. origin_beats is the shift applied to a piece that started
    before beat 0.
    """

    boundaries: tuple[Boundary, ...]
    method_params: MethodParams
    piece_ref: str
    includes_final: bool = True
    candidates: tuple[Boundary, ...] = ()
    time_signature: tuple[int, int] = (4, 4)
    origin_beats: float = 0.0

    @property
    def beats(self) -> list[float]:
        """Boundary positions in beats."""
        return [b.beat for b in self.boundaries]

    @property
    def candidate_beats(self) -> list[float]:
        """Candidate positions in beats (Norm stage one)."""
        return [b.beat for b in self.candidates]

    def as_dict(self) -> dict[str, Any]:
        """Serialize with a stable key order for diff-based checks."""
        data: dict[str, Any] = {
            "source": self.piece_ref,
            "method": self.method_params.method.value,
            "params": self.method_params.params_dict,
            "time_signature": list(self.time_signature),
            "includes_final": self.includes_final,
            "boundaries": [b.as_dict() for b in self.boundaries],
        }
        if self.candidates:
            data["candidates"] = [b.as_dict() for b in self.candidates]
        if self.origin_beats:
            data["origin_beats"] = self.origin_beats
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Segmentation:
        """Create from a result JSON dict."""
        numerator, denominator = data.get("time_signature", (4, 4))
        return cls(
            boundaries=tuple(Boundary.from_dict(b) for b in data["boundaries"]),
            method_params=MethodParams.from_dict(data["method"], data["params"]),
            piece_ref=str(data["source"]),
            includes_final=bool(data.get("includes_final", True)),
            candidates=tuple(
                Boundary.from_dict(b) for b in data.get("candidates", [])
            ),
            time_signature=(int(numerator), int(denominator)),
            origin_beats=float(data.get("origin_beats", 0.0)),
        )

    @classmethod
    def from_note_indices(
        cls,
        piece: Piece,
        note_indices: list[int] | tuple[int, ...],
        method_params: MethodParams,
        candidate_indices: list[int] | tuple[int, ...] | None = None,
    ) -> Segmentation:
        """Build a segmentation whose boundaries start the given notes.

        The end-of-piece boundary (note_index N, at the latest offset)
        is appended to the boundaries and, when given, the candidates.

        Raises:
            IndexOutOfRangeError: A note index outside [0, N).
        """
        final = end_boundary(piece)
        candidates: tuple[Boundary, ...] = ()
        if candidate_indices is not None:
            candidates = note_boundaries(piece, candidate_indices) + (final,)
        return cls(
            boundaries=note_boundaries(piece, note_indices) + (final,),
            method_params=method_params,
            piece_ref=piece.source_path,
            includes_final=True,
            candidates=candidates,
            time_signature=piece.timing.time_signature,
            origin_beats=float(piece.metadata.origin_beats),
        )


def note_boundaries(
    piece: Piece, note_indices: list[int] | tuple[int, ...]
) -> tuple[Boundary, ...]:
    """Boundaries at the onsets of the given notes, in index order."""
    boundaries = []
    for index in sorted(set(note_indices)):
        if not 0 <= index < piece.n_notes:
            raise IndexOutOfRangeError(index, piece.n_notes)
        beat, second = piece.note_time(index)
        boundaries.append(Boundary(note_index=index, beat=beat, second=second))
    return tuple(boundaries)


def end_boundary(piece: Piece) -> Boundary:
    """End-of-piece boundary at the latest note offset."""
    end = piece.end_ticks
    return Boundary(
        note_index=piece.n_notes,
        beat=float(piece.timing.beats(end)),
        second=float(piece.timing.seconds(end)),
    )
