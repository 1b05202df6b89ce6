"""Segment cost protocol used by the changepoint detectors."""

from __future__ import annotations

from typing import Protocol, runtime_checkable

import numpy as np


@runtime_checkable
class ISegmentCost(Protocol):
    """Protocol for additive segment costs over a 1-D signal.

    Implemented by KernelCost. PELT pruning is only exact for costs
    where splitting a segment never increases the total cost.
    """

    @property
    def length(self) -> int:
        """Signal length T."""
        ...

    def cost(self, start: int, end: int) -> float:
        """Cost of the half-open segment [start, end).

        Args:
            start: First index, 0 <= start < end.
            end: One past the last index, end <= T.

        Returns:
            Non-negative segment cost.
        """
        ...

    def costs_to(self, starts: np.ndarray, end: int) -> np.ndarray:
        """Costs of [s, end) for every s in starts, each s < end."""
        ...
