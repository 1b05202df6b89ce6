"""Test configuration layering and validation."""

from __future__ import annotations

from pathlib import Path

import pytest

from symseg.config import Config, load_config, parse_config_text
from symseg.const import DEFAULT_CAPACITY_LIMIT, ENV_CAPACITY_LIMIT
from symseg.exceptions import ConfigError
from symseg.models import Method, NormParams, ToleranceKind


def test_defaults():
    """Test the defaults are the SWD mid-level G-PELT setting."""
    config = load_config(environ={})
    assert config.method == "g-pelt"
    assert (config.alpha, config.beta, config.penalty) == (0.6, 0.15, 0.7)
    assert config.capacity_limit == DEFAULT_CAPACITY_LIMIT
    assert config.tolerance_kind is ToleranceKind.ONE_BAR
    assert config.output is None


def test_preset():
    """Test a preset replaces the method parameters."""
    config = load_config(preset="bps-high", environ={})
    assert (config.alpha, config.beta, config.penalty) == (2.3, 1.5, 4.0)


def test_unknown_preset():
    """Test an unknown preset name."""
    with pytest.raises(ConfigError):
        load_config(preset="swd-low", environ={})


def test_layer_precedence(tmp_path):
    """Test file beats preset, environment beats file, flags beat both."""
    path = tmp_path / "run.conf"
    path.write_text(
        "# tuned\npenalty = 0.9\ncapacity-limit = 100\nalpha = 0.5  # coarse\n",
        encoding="utf-8",
    )
    config = load_config(
        path,
        preset="swd-mid",
        overrides={"alpha": 0.8, "beta": None},
        environ={ENV_CAPACITY_LIMIT: "200"},
    )
    assert config.penalty == 0.9
    assert config.capacity_limit == 200
    assert config.alpha == 0.8
    assert config.beta == 0.15


def test_missing_file(tmp_path):
    """Test an unreadable config file."""
    with pytest.raises(ConfigError) as err:
        load_config(tmp_path / "missing.conf", environ={})
    assert err.value.source == str(tmp_path / "missing.conf")


@pytest.mark.parametrize(
    "values",
    [
        {"gamma": 1.0},
        {"alpha": 0},
        {"penalty": -1},
        {"w2": 0},
        {"capacity_limit": 1},
        {"method": "ruptures"},
        {"tolerance": "two-bars"},
        {"jobs": "many"},
    ],
)
def test_invalid_values(values):
    """Test unknown keys and out-of-range values."""
    with pytest.raises(ConfigError):
        Config.from_dict(values)


def test_coercion():
    """Test string values from files are coerced."""
    config = Config.from_dict({"w2": "3", "tau1": "-0.5", "output": "out"})
    assert config.w2 == 3
    assert config.tau1 == -0.5
    assert config.output == Path("out")


def test_parse_config_text_errors():
    """Test a line without a key or an equals sign."""
    assert parse_config_text("\n  # only a comment\n") == {}
    with pytest.raises(ConfigError):
        parse_config_text("alpha 0.6\n", "x.conf")
    with pytest.raises(ConfigError):
        parse_config_text("= 0.6\n")


def test_method_params():
    """Test each method gets only its own parameters."""
    pelt = load_config(environ={}).method_params
    assert pelt.method is Method.G_PELT
    assert pelt.beta == 0.15

    window = load_config(preset="swd-mid-window", environ={}).method_params
    assert window.method is Method.G_WINDOW
    assert window.beta is None
    assert (window.alpha, window.penalty) == (1.0, 0.5)

    norm = load_config(preset="swd-mid-norm", environ={}).method_params
    assert norm.norm == NormParams(alpha1=0.6, tau1=1.0, w2=2, tau2=0.5)


def test_run_options():
    """Test run options carry the non-method settings."""
    options = load_config(
        overrides={"tick_tolerance": 5, "combine": "concat"}, environ={}
    ).run_options
    assert options.tick_tolerance == 5
    assert options.combine == "concat"
