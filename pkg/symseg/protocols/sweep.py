"""Sweep progress observer protocol."""

from __future__ import annotations

from typing import TYPE_CHECKING, Protocol, runtime_checkable

if TYPE_CHECKING:
    from ..sweep import SweepRow


@runtime_checkable
class ISweepObserver(Protocol):
    """Protocol for sweep progress observers.

    Implemented by the CLI progress logger and by tests. Exceptions
    raised by an observer are logged and never stop the sweep.
    """

    def on_file_done(self, combo: dict[str, float], file: str, ok: bool) -> None:
        """Called when one file of one parameter combination finishes.

        Args:
            combo: Parameter values of the grid point.
            file: Source path of the file.
            ok: False when the file failed and was skipped.
        """
        ...

    def on_row(self, row: SweepRow) -> None:
        """Called when an aggregate table row is complete."""
        ...
