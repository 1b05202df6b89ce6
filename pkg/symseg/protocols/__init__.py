"""Protocol interfaces for symseg.

Contracts between the detectors and their cost functions, and between
the sweep runner and whoever watches its progress.
"""

from .cost import ISegmentCost
from .sweep import ISweepObserver

__all__ = [
    "ISegmentCost",
    "ISweepObserver",
]
