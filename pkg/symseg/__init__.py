"""Graph-based boundary detection for symbolic music.

Pieces are read from Standard MIDI Files or note CSV tables, turned into
a note graph whose adjacency-matrix novelty curve is segmented with
kernel changepoint detection (PELT or a sliding window). A two-stage
normalized-feature method and an equidistant baseline are included for
comparison, together with tolerance-window scoring and parameter sweeps.
"""

from .config import Config, load_config
from .evaluation import evaluate_corpus, match_boundaries
from .exceptions import SymsegError
from .models import Method, MethodParams, NormParams, Piece, Segmentation
from .parsers import load_piece
from .pipeline import RunOptions, g_pelt, g_window, run_method, segment_file

__version__ = "0.1.0"

__all__ = [
    "Config",
    "Method",
    "MethodParams",
    "NormParams",
    "Piece",
    "RunOptions",
    "Segmentation",
    "SymsegError",
    "evaluate_corpus",
    "g_pelt",
    "g_window",
    "load_config",
    "load_piece",
    "match_boundaries",
    "run_method",
    "segment_file",
]
