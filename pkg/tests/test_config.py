"""Unit tests for config module."""

import json
import logging
import os
from unittest.mock import patch

import pytest

from mistsim.core.config import Config
from mistsim.core.logging import configure_logging, get_logger
from mistsim.core.exceptions import ConfigurationError


class TestConfig:
    """Tests for Config class."""

    def test_defaults(self) -> None:
        """Test default values."""
        config = Config()

        assert config.threads == 4
        assert config.log_level == "INFO"
        assert config.dense_cutoff == 512
        assert config.steady_state_cap == 512
        assert config.rwa_margin == 0.1
        assert config.bisection_tolerance == 1e-3

    def test_config_is_immutable(self) -> None:
        """Test that config is frozen (immutable)."""
        config = Config()

        with pytest.raises(AttributeError):
            config.threads = 8  # type: ignore

    def test_zero_threads_raises(self) -> None:
        """Test that a thread count below one is rejected."""
        with pytest.raises(ConfigurationError, match="threads must be >= 1"):
            Config(threads=0)

    def test_unknown_log_level_raises(self) -> None:
        """Test that an unknown log level is rejected."""
        with pytest.raises(ConfigurationError, match="log_level"):
            Config(log_level="LOUD")

    def test_rwa_margin_range(self) -> None:
        """Test that the RWA margin must lie strictly between 0 and 1."""
        with pytest.raises(ConfigurationError, match="rwa_margin"):
            Config(rwa_margin=1.5)

    def test_trace_tolerance_order(self) -> None:
        """Test that the renormalization tolerance must stay below the abort tolerance."""
        with pytest.raises(ConfigurationError, match="trace tolerances"):
            Config(trace_renorm_tolerance=1e-3, trace_abort_tolerance=1e-4)

    def test_from_env(self) -> None:
        """Test loading config from environment variables."""
        env_vars = {
            "MIST_SIM_THREADS": "8",
            "MIST_SIM_LOG_LEVEL": "debug",
            "MIST_SIM_OUTPUT_DIR": "/tmp/mist",
        }

        with patch.dict(os.environ, env_vars, clear=False):
            config = Config.from_env()

        assert config.threads == 8
        assert config.log_level == "DEBUG"
        assert config.output_dir == "/tmp/mist"

    def test_from_env_defaults(self) -> None:
        """Test from_env with no variables set."""
        with patch.dict(os.environ, {}, clear=True):
            config = Config.from_env()

        assert config.threads == 4
        assert config.log_level == "INFO"
        assert config.output_dir == "results"

    def test_from_env_bad_integer(self) -> None:
        """Test that a non-integer thread count is reported."""
        with patch.dict(os.environ, {"MIST_SIM_THREADS": "many"}, clear=False):
            with pytest.raises(ConfigurationError, match="must be an integer"):
                Config.from_env()

    def test_overrides_beat_environment(self) -> None:
        """Test that explicit overrides take precedence over the environment."""
        with patch.dict(os.environ, {"MIST_SIM_THREADS": "8"}, clear=False):
            config = Config.from_env(threads=2, rwa_margin=0.2)

        assert config.threads == 2
        assert config.rwa_margin == 0.2

    def test_with_updates(self) -> None:
        """Test creating updated config."""
        original = Config()
        updated = original.with_updates(threads=1, dense_cutoff=64)

        assert original.threads == 4
        assert updated.threads == 1
        assert updated.dense_cutoff == 64
        assert updated.steady_state_cap == original.steady_state_cap

    def test_with_updates_validates(self) -> None:
        """Test that updates go through validation."""
        with pytest.raises(ConfigurationError):
            Config().with_updates(threads=-1)


class TestLogging:
    """Tests for logger configuration."""

    def test_level_from_environment(self) -> None:
        with patch.dict(os.environ, {"MIST_SIM_LOG_LEVEL": "debug"}):
            logger = configure_logging()

        assert logger.level == logging.DEBUG
        assert len(logger.handlers) == 1
        assert logger.propagate is False

    def test_json_lines_carry_extra_fields(self, capsys: pytest.CaptureFixture) -> None:
        configure_logging("INFO", json_format=True)

        get_logger("figures").info('ran "fig2a"', extra={"scenario_sha256": "ab" * 32})

        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["name"] == "mistsim.figures"
        assert record["message"] == 'ran "fig2a"'
        assert record["scenario_sha256"] == "ab" * 32

    def test_reconfigure_replaces_handler(self) -> None:
        configure_logging("INFO")
        logger = configure_logging("WARNING")

        assert len(logger.handlers) == 1
        assert logger.level == logging.WARNING
