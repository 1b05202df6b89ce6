"""Constants for symseg."""

from typing import Final

DOMAIN: Final = "symseg"

# Timing defaults
DEFAULT_TICKS_PER_QUARTER: Final = 480
DEFAULT_TEMPO_US_PER_QUARTER: Final = 500_000  # 120 bpm
DEFAULT_TIME_SIGNATURE: Final = (4, 4)
DEFAULT_VELOCITY: Final = 64
DEFAULT_CSV_DURATION_BEATS: Final = 1

# Quadratic allocation guard for the adjacency matrix
DEFAULT_CAPACITY_LIMIT: Final = 50_000
ENV_CAPACITY_LIMIT: Final = "SYMSEG_CAPACITY_LIMIT"

# Window scaling: w = alpha * N / NOTES_PER_WINDOW_UNIT
NOTES_PER_WINDOW_UNIT: Final = 15

# Evaluation
DEFAULT_HISTOGRAM_BIN_BEATS: Final = 10.0
TOLERANCE_ONE_BEAT: Final = "one-beat"
TOLERANCE_ONE_BAR: Final = "one-bar"

# Method names (CLI and JSON)
METHOD_NORM: Final = "norm"
METHOD_G_PELT: Final = "g-pelt"
METHOD_G_WINDOW: Final = "g-window"
METHOD_BASELINE: Final = "baseline"

# Config keys
CONF_METHOD: Final = "method"
CONF_ALPHA: Final = "alpha"
CONF_BETA: Final = "beta"
CONF_PENALTY: Final = "penalty"
CONF_ALPHA1: Final = "alpha1"
CONF_TAU1: Final = "tau1"
CONF_W2: Final = "w2"
CONF_TAU2: Final = "tau2"
CONF_CAPACITY: Final = "capacity_limit"
CONF_TICKS_PER_QUARTER: Final = "ticks_per_quarter"
CONF_TOLERANCE: Final = "tolerance"
CONF_OUTPUT: Final = "output"
CONF_CACHE_DIR: Final = "cache_dir"
CONF_JOBS: Final = "jobs"
CONF_TICK_TOLERANCE: Final = "tick_tolerance"
CONF_NORM_STAGE: Final = "norm_stage"
CONF_COMBINE: Final = "combine"

NORM_STAGE_CANDIDATES: Final = "candidates"
NORM_STAGE_REFINED: Final = "refined"

# Optimal parameters per dataset and structure level
PRESET_SWD_MID: Final = "swd-mid"
PRESET_SWD_MID_NORM: Final = "swd-mid-norm"
PRESET_SWD_MID_WINDOW: Final = "swd-mid-window"
PRESET_BPS_HIGH: Final = "bps-high"
PRESET_BPS_MID: Final = "bps-mid"
PRESET_BPS_LOW: Final = "bps-low"

PRESETS: Final[dict[str, dict[str, str | float]]] = {
    PRESET_SWD_MID: {
        CONF_METHOD: METHOD_G_PELT,
        CONF_ALPHA: 0.6,
        CONF_BETA: 0.15,
        CONF_PENALTY: 0.7,
    },
    PRESET_SWD_MID_NORM: {
        CONF_METHOD: METHOD_NORM,
        CONF_ALPHA1: 0.6,
        CONF_TAU1: 1.0,
        CONF_W2: 2,
        CONF_TAU2: 0.5,
    },
    PRESET_SWD_MID_WINDOW: {
        CONF_METHOD: METHOD_G_WINDOW,
        CONF_ALPHA: 1.0,
        CONF_PENALTY: 0.5,
    },
    PRESET_BPS_HIGH: {
        CONF_METHOD: METHOD_G_PELT,
        CONF_ALPHA: 2.3,
        CONF_BETA: 1.5,
        CONF_PENALTY: 4.0,
    },
    PRESET_BPS_MID: {
        CONF_METHOD: METHOD_G_PELT,
        CONF_ALPHA: 1.0,
        CONF_BETA: 0.01,
        CONF_PENALTY: 0.5,
    },
    PRESET_BPS_LOW: {
        CONF_METHOD: METHOD_G_PELT,
        CONF_ALPHA: 0.1,
        CONF_BETA: 0.15,
        CONF_PENALTY: 0.1,
    },
}

# Headline configuration: SWD mid-level G-PELT
DEFAULT_PRESET: Final = PRESET_SWD_MID
DEFAULT_ALPHA: Final = 0.6
DEFAULT_BETA: Final = 0.15
DEFAULT_PENALTY: Final = 0.7
DEFAULT_ALPHA1: Final = 0.6
DEFAULT_TAU1: Final = 1.0
DEFAULT_W2: Final = 2
DEFAULT_TAU2: Final = 0.5

# Equidistant baseline boundary counts per level
BASELINE_K_SWD: Final = 5
BASELINE_K_BY_LEVEL: Final = {"high": 4, "mid": 14, "low": 46}

# Input discovery
MIDI_SUFFIXES: Final = (".mid", ".midi")
CSV_SUFFIXES: Final = (".csv",)
