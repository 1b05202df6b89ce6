"""Run configuration.

Values are layered, later layers winning: built-in defaults, a level
preset, a flat ``key = value`` file, the environment, then command-line
flags. The merged mapping is validated by a voluptuous schema before
any work starts; unknown keys are an error.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
import logging
import os
from pathlib import Path
from typing import Any

import voluptuous as vol

from .const import (
    CONF_ALPHA,
    CONF_ALPHA1,
    CONF_BETA,
    CONF_CACHE_DIR,
    CONF_CAPACITY,
    CONF_COMBINE,
    CONF_JOBS,
    CONF_METHOD,
    CONF_NORM_STAGE,
    CONF_OUTPUT,
    CONF_PENALTY,
    CONF_TAU1,
    CONF_TAU2,
    CONF_TICK_TOLERANCE,
    CONF_TICKS_PER_QUARTER,
    CONF_TOLERANCE,
    CONF_W2,
    DEFAULT_ALPHA,
    DEFAULT_ALPHA1,
    DEFAULT_BETA,
    DEFAULT_CAPACITY_LIMIT,
    DEFAULT_PENALTY,
    DEFAULT_TAU1,
    DEFAULT_TAU2,
    DEFAULT_TICKS_PER_QUARTER,
    DEFAULT_W2,
    ENV_CAPACITY_LIMIT,
    METHOD_G_PELT,
    METHOD_G_WINDOW,
    METHOD_NORM,
    NORM_STAGE_CANDIDATES,
    NORM_STAGE_REFINED,
    PRESETS,
    TOLERANCE_ONE_BAR,
    TOLERANCE_ONE_BEAT,
)
from .exceptions import ConfigError
from .models.evaluation import ToleranceKind
from .models.segmentation import Method, MethodParams, NormParams
from .norm_method import COMBINE_CONCAT, COMBINE_SUM
from .pipeline import RunOptions

_LOGGER = logging.getLogger(__name__)

_POSITIVE = vol.All(vol.Coerce(float), vol.Range(min=0, min_included=False))
_NON_NEGATIVE = vol.All(vol.Coerce(float), vol.Range(min=0))

CONFIG_SCHEMA = vol.Schema(
    {
        vol.Optional(CONF_METHOD, default=METHOD_G_PELT): vol.In(
            [METHOD_G_PELT, METHOD_G_WINDOW, METHOD_NORM]
        ),
        vol.Optional(CONF_ALPHA, default=DEFAULT_ALPHA): _POSITIVE,
        vol.Optional(CONF_BETA, default=DEFAULT_BETA): _POSITIVE,
        vol.Optional(CONF_PENALTY, default=DEFAULT_PENALTY): _NON_NEGATIVE,
        vol.Optional(CONF_ALPHA1, default=DEFAULT_ALPHA1): _POSITIVE,
        vol.Optional(CONF_TAU1, default=DEFAULT_TAU1): vol.Coerce(float),
        vol.Optional(CONF_W2, default=DEFAULT_W2): vol.All(
            vol.Coerce(int), vol.Range(min=1)
        ),
        vol.Optional(CONF_TAU2, default=DEFAULT_TAU2): vol.Coerce(float),
        vol.Optional(CONF_CAPACITY, default=DEFAULT_CAPACITY_LIMIT): vol.All(
            vol.Coerce(int), vol.Range(min=2)
        ),
        vol.Optional(
            CONF_TICKS_PER_QUARTER, default=DEFAULT_TICKS_PER_QUARTER
        ): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_TICK_TOLERANCE, default=0): vol.All(
            vol.Coerce(int), vol.Range(min=0)
        ),
        vol.Optional(CONF_TOLERANCE, default=TOLERANCE_ONE_BAR): vol.In(
            [TOLERANCE_ONE_BEAT, TOLERANCE_ONE_BAR]
        ),
        vol.Optional(CONF_NORM_STAGE, default=NORM_STAGE_REFINED): vol.In(
            [NORM_STAGE_CANDIDATES, NORM_STAGE_REFINED]
        ),
        vol.Optional(CONF_COMBINE, default=COMBINE_SUM): vol.In(
            [COMBINE_SUM, COMBINE_CONCAT]
        ),
        vol.Optional(CONF_JOBS, default=1): vol.All(vol.Coerce(int), vol.Range(min=1)),
        vol.Optional(CONF_OUTPUT, default=None): vol.Any(None, vol.Coerce(Path)),
        vol.Optional(CONF_CACHE_DIR, default=None): vol.Any(None, vol.Coerce(Path)),
    },
    extra=vol.PREVENT_EXTRA,
)


@dataclass(frozen=True)
class Config:
    """Validated run configuration."""

    method: str
    alpha: float
    beta: float
    penalty: float
    alpha1: float
    tau1: float
    w2: int
    tau2: float
    capacity_limit: int
    ticks_per_quarter: int
    tick_tolerance: int
    tolerance: str
    norm_stage: str
    combine: str
    jobs: int
    output: Path | None
    cache_dir: Path | None

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Config:
        """Validate a raw mapping and build a Config.

        Raises:
            ConfigError: Unknown key or invalid value.
        """
        try:
            valid = CONFIG_SCHEMA(dict(data))
        except vol.Invalid as err:
            raise ConfigError(f"Invalid configuration: {err}") from err
        return cls(**valid)

    @property
    def method_params(self) -> MethodParams:
        """Parameters of the configured method."""
        method = Method(self.method)
        if method is Method.NORM:
            return MethodParams(
                method=method,
                norm=NormParams(
                    alpha1=self.alpha1, tau1=self.tau1, w2=self.w2, tau2=self.tau2
                ),
            )
        return MethodParams(
            method=method,
            alpha=self.alpha,
            beta=self.beta if method is Method.G_PELT else None,
            penalty=self.penalty,
        )

    @property
    def run_options(self) -> RunOptions:
        """Method-independent run settings."""
        return RunOptions(
            capacity_limit=self.capacity_limit,
            tick_tolerance=self.tick_tolerance,
            ticks_per_quarter=self.ticks_per_quarter,
            combine=self.combine,
        )

    @property
    def tolerance_kind(self) -> ToleranceKind:
        """Configured matching tolerance."""
        return ToleranceKind(self.tolerance)


def parse_config_text(text: str, source: str = "") -> dict[str, str]:
    """Parse flat ``key = value`` lines; ``#`` starts a comment.

    Raises:
        ConfigError: A line without "=" or with an empty key.
    """
    values: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise ConfigError(f"Line {number}: expected key = value", source=source)
        values[key] = value.strip()
    return values


def load_config(
    config_file: Path | None = None,
    preset: str | None = None,
    overrides: Mapping[str, Any] | None = None,
    environ: Mapping[str, str] | None = None,
) -> Config:
    """Merge every configuration layer and validate the result.

    Args:
        config_file: Optional flat key=value file.
        preset: Level preset name, e.g. "swd-mid" or "bps-low".
        overrides: Explicit values, typically from command-line flags.
            None values are ignored.
        environ: Environment mapping; defaults to os.environ.

    Raises:
        ConfigError: Unknown preset or key, invalid value, unreadable file.
    """
    merged: dict[str, Any] = {}

    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(
                f"Unknown preset {preset!r}; choose from {', '.join(sorted(PRESETS))}"
            )
        merged.update(PRESETS[preset])

    if config_file is not None:
        try:
            text = config_file.read_text(encoding="utf-8")
        except OSError as err:
            raise ConfigError(
                f"Cannot read config file: {err}", source=str(config_file)
            ) from err
        merged.update(parse_config_text(text, str(config_file)))

    env = os.environ if environ is None else environ
    if env.get(ENV_CAPACITY_LIMIT):
        merged[CONF_CAPACITY] = env[ENV_CAPACITY_LIMIT]

    if overrides:
        merged.update({k: v for k, v in overrides.items() if v is not None})

    config = Config.from_dict(merged)
    _LOGGER.debug("Configuration: %s", config)
    return config
