"""Tests ``run_config`` module."""

from pathlib import Path

import pytest

from fsm_watermark import run_config
from fsm_watermark.run_config import RunConfig


@pytest.fixture
def output_dirname():
    """Directory receiving the config files written by this module's tests"""
    dirname = Path(__file__).absolute().parent / "test_run_config"
    dirname.mkdir(parents=True, exist_ok=True)
    return dirname


def test_run_config_defaults():
    """Test default settings"""

    config = RunConfig("verify", package="a.json", secret="b.json")

    assert (
        config.command == "verify" and
        config.mode == "fixed" and
        config.setting_seed == run_config.SETTING_SEED and
        config.key_seed == run_config.KEY_SEED and
        config.scheme_seed == run_config.SCHEME_SEED and
        config.scan is False and
        config.branch is None and
        config.path("package") == Path("a.json") and
        config.path("report") is None and
        config.as_dict()["command"] == "verify"
    )

    with pytest.raises(AttributeError):
        _ = config.unknown


def test_run_config_none_keeps_default():
    """Test unset flags never erase a default"""

    config = RunConfig("attack", package="a.json", patience=None, probe_budget=12)

    assert (
        config.patience == run_config.PATIENCE and
        config.probe_budget == 12
    )


@pytest.mark.parametrize("command, values, message", [
    ("sign", {}, "unknown command 'sign'."),
    ("verify", {"package": "a", "secret": "b", "colour": 1}, "unknown setting(s) ['colour']."),
    ("lprk", {"input": "a"}, "'lprk' requires n, k, output."),
    ("decompose", {"input": "a", "output": "b", "mode": "matrix"},
     "'decompose' needs mode 'fixed' or 'optimal'."),
    ("decompose", {"input": "a", "output": "b"}, "'decompose' requires n, k."),
    ("verify", {"package": "a", "secret": "b", "mode": "xor"},
     "unknown mode 'xor', expected one of ('matrix', 'fixed', 'optimal')."),
    ("lpr", {"input": "a", "output": "b", "m": 0}, "'m' (0) must be an integer >= 1."),
    ("lpr", {"input": "a", "output": "b", "m": "5"}, "'m' (5) must be an integer >= 1."),
    ("verify", {"package": "a", "secret": "b", "branch": -1},
     "'branch' (-1) must be an integer >= 0."),
])
def test_run_config_raise(command, values, message):
    """Test invalid settings"""

    with pytest.raises(ValueError) as error:
        RunConfig(command, **values)
    assert message in str(error.value)


def test_run_config_optimal_decompose_needs_no_shape():
    """Test the minimal decomposition works on any machine"""

    config = RunConfig("decompose", input="a", output="b", mode="optimal")

    assert config.n is None and config.lattice_cap == 12


def test_from_sources(example_dirname):
    """Test flags win over the config file"""

    config = RunConfig.from_sources(
        "emit-package", {"input": "host.json", "package": "p.json", "secret": "s.json",
                         "k": 2, "n": None},
        example_dirname / "run_config.json")

    assert (
        config.n == 5 and
        config.k == 2 and
        config.mode == "fixed" and
        config.key_seed == 2024 and
        config.scheme_seed == 7
    )


def test_from_sources_without_file():
    """Test flags only"""

    config = RunConfig.from_sources("lpr", {"input": "a", "output": "b", "m": 4})

    assert config.m == 4


def test_from_sources_raise(output_dirname):
    """Test unreadable config files"""

    broken = output_dirname / "broken.json"
    broken.write_text("{", encoding='utf-8')
    listing = output_dirname / "listing.json"
    listing.write_text("[1, 2]", encoding='utf-8')
    unknown = output_dirname / "unknown.json"
    unknown.write_text('{"colour": "red"}', encoding='utf-8')

    with pytest.raises(ValueError) as error:
        RunConfig.from_sources("lpr", {"input": "a", "output": "b", "m": 4}, broken)
    assert "is not valid JSON" in str(error.value)

    with pytest.raises(ValueError) as error:
        RunConfig.from_sources("lpr", {"input": "a", "output": "b", "m": 4}, listing)
    assert "must hold a JSON object." in str(error.value)

    with pytest.raises(ValueError) as error:
        RunConfig.from_sources("lpr", {"input": "a", "output": "b", "m": 4}, unknown)
    assert "unknown setting(s) ['colour']." in str(error.value)

    with pytest.raises(OSError):
        RunConfig.from_sources("lpr", {"input": "a", "output": "b", "m": 4},
                               output_dirname / "missing.json")
