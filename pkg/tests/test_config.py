"""Tests for settings merging and validation."""

from __future__ import annotations

from pathlib import Path

import pytest

from b92_keyrate.config import (
    CMD_GOLDENS,
    CMD_OPTIMIZE,
    CMD_RATE,
    CMD_SIMULATE,
    CMD_SWEEP,
    CMD_VALIDATE,
    build_run_config,
    parse_config_file,
)
from b92_keyrate.const import (
    CONF_PROFILE,
    DEFAULT_EPS,
    DEFAULT_TRIALS,
    GOLDEN_FILE,
    PACC_NORMALIZATION,
    PACC_PAPER,
    PROFILE_THOROUGH,
)
from b92_keyrate.entropy_bound import LambdaForm
from b92_keyrate.exceptions import ConfigError


class TestParseConfigFile:
    """Tests for parse_config_file."""

    def test_parse(self, tmp_path: Path) -> None:
        """Test comments, blank lines and dashed keys."""
        path = tmp_path / "run.conf"
        path.write_text(
            "# evaluation\n\nprofile = thorough\n--pacc-variant=normalization  # exact\n",
            encoding="utf-8",
        )
        assert parse_config_file(path) == {
            "profile": "thorough",
            "pacc_variant": "normalization",
        }

    def test_missing_equals(self, tmp_path: Path) -> None:
        """Test a line without `=` names the file and line."""
        path = tmp_path / "run.conf"
        path.write_text("profile thorough\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="run.conf:1"):
            parse_config_file(path)

    def test_unknown_key(self, tmp_path: Path) -> None:
        """Test keys no command knows are rejected."""
        path = tmp_path / "run.conf"
        path.write_text("profile = fast\nspeed = 3\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="run.conf:2: unknown setting 'speed'"):
            parse_config_file(path)

    def test_missing_file(self, tmp_path: Path) -> None:
        """Test an unreadable file raises ConfigError."""
        with pytest.raises(ConfigError):
            parse_config_file(tmp_path / "absent.conf")


class TestBuildRunConfig:
    """Tests for build_run_config."""

    def test_defaults(self) -> None:
        """Test unset settings take the built-in defaults."""
        cfg = build_run_config(CMD_RATE, {}, {"q": 0.02, "asymptotic": True})
        eps, search, opt = cfg.evaluation()
        assert eps.eps == DEFAULT_EPS
        assert search.lambda_form is LambdaForm.DIFFERENCE
        assert opt.keep_trace is False
        assert cfg["diagnostics"] is False
        assert opt.pacc_variant == PACC_NORMALIZATION

    def test_flags_override_file(self) -> None:
        """Test the merge order defaults < config file < flags."""
        cfg = build_run_config(
            CMD_RATE,
            {"profile": PROFILE_THOROUGH, "pacc_variant": PACC_PAPER, "q": "0.01"},
            {"q": 0.03, "n": 1e7, "profile": None},
        )
        assert cfg[CONF_PROFILE] == PROFILE_THOROUGH
        assert cfg["pacc_variant"] == PACC_PAPER
        assert cfg["q"] == 0.03

    def test_file_keys_of_other_commands_ignored(self) -> None:
        """Test a shared config file may hold keys for other commands."""
        cfg = build_run_config(CMD_VALIDATE, {"rounds": "1e6", "profile": "fast"}, {})
        assert cfg["trials"] == DEFAULT_TRIALS
        with pytest.raises(ConfigError, match="takes no key-rate settings"):
            cfg.evaluation()

    @pytest.mark.parametrize(
        ("flags", "message"),
        [
            ({"q": 0.7, "asymptotic": True}, "--q"),
            ({"q": 0.02, "n": 0.5}, "--n"),
            ({"q": 0.02, "asymptotic": True, "alpha": 1.0, "penc": 0.5}, "--alpha"),
            ({"q": 0.02, "asymptotic": True, "grid_per_axis": 1}, "--grid-per-axis"),
            ({"q": 0.02, "asymptotic": True, "pacc_variant": "other"}, "--pacc-variant"),
        ],
    )
    def test_flag_named_errors(self, flags: dict[str, object], message: str) -> None:
        """Test out-of-range values name the offending flag."""
        with pytest.raises(ConfigError, match=message):
            build_run_config(CMD_RATE, {}, flags)

    def test_bad_epsilon_chain(self) -> None:
        """Test an inconsistent security budget becomes a ConfigError."""
        with pytest.raises(ConfigError, match="invalid security parameters"):
            build_run_config(CMD_RATE, {}, {"q": 0.02, "asymptotic": True, "eps_ec": 9e-10})

    def test_unknown_command(self) -> None:
        """Test an unknown command raises."""
        with pytest.raises(ConfigError):
            build_run_config("plot")


class TestCrossChecks:
    """Tests for settings that depend on each other."""

    @pytest.mark.parametrize(
        "flags",
        [
            {"q": 0.02},
            {"q": 0.02, "asymptotic": True, "alpha": 0.5},
            {"asymptotic": True},
            {"asymptotic": True, "stats_file": "stats.json"},
        ],
    )
    def test_rate(self, flags: dict[str, object]) -> None:
        """Test missing --n, lone --alpha, missing --q and a bare --stats-file."""
        with pytest.raises(ConfigError):
            build_run_config(CMD_RATE, {}, flags)

    def test_rate_stats_file(self) -> None:
        """Test --stats-file replaces --q."""
        cfg = build_run_config(
            CMD_RATE,
            {},
            {"stats_file": "stats.json", "alpha": 0.6, "penc": 0.8, "n": 1e8},
        )
        assert cfg.get("q") is None

    def test_optimize_tolerance_mode(self) -> None:
        """Test --resolution makes --q optional."""
        cfg = build_run_config(CMD_OPTIMIZE, {}, {"asymptotic": True, "resolution": 1e-3})
        assert cfg["resolution"] == 1e-3
        with pytest.raises(ConfigError, match="--resolution"):
            build_run_config(CMD_OPTIMIZE, {}, {"asymptotic": True, "resolution": 1e-6})

    @pytest.mark.parametrize(
        "flags",
        [
            {},
            {"vary": "n", "q": 0.02},
            {"vary": "n", "values": "1e6,1e7"},
            {"vary": "alpha", "q": 0.02, "n": 1e8, "values": "0.2,0.4"},
            {"vary": "q", "values": "0.01,0.02"},
        ],
    )
    def test_sweep_incomplete(self, flags: dict[str, object]) -> None:
        """Test sweeps without enough settings to build their points."""
        with pytest.raises(ConfigError):
            build_run_config(CMD_SWEEP, {}, flags)

    def test_sweep_values(self) -> None:
        """Test comma-separated values become floats."""
        cfg = build_run_config(CMD_SWEEP, {}, {"vary": "n", "q": 0.02, "values": "1e6, 1e7"})
        assert cfg["values"] == [1e6, 1e7]

    def test_simulate(self) -> None:
        """Test exactly one of --q and --attack-file, and integer rounds."""
        base = {"alpha": 0.6, "penc": 0.8, "rounds": 1e6}
        with pytest.raises(ConfigError, match="exactly one"):
            build_run_config(CMD_SIMULATE, {}, base)
        with pytest.raises(ConfigError, match="exactly one"):
            build_run_config(CMD_SIMULATE, {}, {**base, "q": 0.05, "attack_file": "a.json"})
        cfg = build_run_config(CMD_SIMULATE, {}, {**base, "q": 0.05})
        assert cfg["rounds"] == 1_000_000
        assert isinstance(cfg["rounds"], int)

    def test_simulate_requires_rounds(self) -> None:
        """Test --rounds is required."""
        with pytest.raises(ConfigError, match="--rounds"):
            build_run_config(CMD_SIMULATE, {}, {"alpha": 0.6, "penc": 0.8, "q": 0.05})

    def test_goldens_defaults(self) -> None:
        """Test the golden command's defaults."""
        cfg = build_run_config(CMD_GOLDENS)
        assert cfg["path"] == GOLDEN_FILE
        assert cfg["check"] is False
        assert cfg["trials"] == 100
