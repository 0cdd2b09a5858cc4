"""
Unit tests for settings, run-config loading and logging setup.
"""

import pytest
import yaml
from loguru import logger

from src.core.config import Settings, config_hash, load_run_config, write_resolved_config
from src.core.errors import ConfigError
from src.core.logging import setup_logging
from src.models.config import RunConfig


class TestSettings:
    """Tests for environment-backed settings"""

    def test_defaults(self, monkeypatch):
        """Unset variables fall back to the defaults"""
        monkeypatch.delenv("EXOFORCE_OUTPUT_ROOT", raising=False)
        monkeypatch.delenv("EXOFORCE_WORKERS", raising=False)
        s = Settings(_env_file=None)
        assert s.output_root == "runs"
        assert s.workers == 1
        assert s.log_level == "INFO"

    def test_environment(self, monkeypatch):
        """EXOFORCE_* variables override the defaults"""
        monkeypatch.setenv("EXOFORCE_OUTPUT_ROOT", "/tmp/exo")
        monkeypatch.setenv("EXOFORCE_WORKERS", "4")
        s = Settings(_env_file=None)
        assert s.output_root == "/tmp/exo"
        assert s.workers == 4


class TestLoadRunConfig:
    """Tests for load_run_config"""

    def test_defaults_without_file(self):
        """No path gives the default RunConfig"""
        assert load_run_config() == RunConfig()

    def test_yaml_and_overrides(self, tmp_path):
        """File values load; overrides win"""
        path = tmp_path / "run.yaml"
        path.write_text("seed: 3\nsweep:\n  u_max: 2.0\ncontrol:\n  steady_targets: [0.1]\n")
        config = load_run_config(path, ["sweep.increment=0.05", "seed=7", "render.size=64"])
        assert config.seed == 7
        assert config.sweep.u_max == 2.0
        assert config.sweep.increment == 0.05
        assert config.render.size == 64
        assert config.control.steady_targets == [0.1]

    def test_empty_file(self, tmp_path):
        """An empty document is the defaults"""
        path = tmp_path / "empty.yaml"
        path.write_text("")
        assert load_run_config(path) == RunConfig()

    @pytest.mark.parametrize(
        "content",
        ["seed: [unclosed", "- just\n- a list\n", "sweep:\n  increment: -1\n", "seed: not-a-number\n"],
    )
    def test_malformed_documents(self, tmp_path, content):
        """Bad YAML, non-mapping documents and invalid values are ConfigErrors"""
        path = tmp_path / "bad.yaml"
        path.write_text(content)
        with pytest.raises(ConfigError):
            load_run_config(path)

    def test_missing_file(self, tmp_path):
        """A path that does not exist is a ConfigError"""
        with pytest.raises(ConfigError, match="not found"):
            load_run_config(tmp_path / "missing.yaml")

    @pytest.mark.parametrize("override", ["seed", "seed.value=1", "=3"])
    def test_bad_overrides(self, override):
        """Overrides need key=value form into a section"""
        with pytest.raises(ConfigError):
            load_run_config(overrides=[override])


class TestResolvedConfig:
    """Tests for config_hash and write_resolved_config"""

    def test_hash_is_stable(self):
        """Equal configs hash equally; any change shows"""
        assert config_hash(RunConfig()) == config_hash(RunConfig())
        assert config_hash(RunConfig()) != config_hash(RunConfig(seed=1))
        assert len(config_hash(RunConfig())) == 64

    def test_written_document(self, tmp_path):
        """config.resolved.yaml reloads and carries the hash"""
        config = RunConfig(seed=11)
        path = write_resolved_config(config, tmp_path / "artifacts")
        data = yaml.safe_load(path.read_text())
        assert data.pop("config_hash") == config_hash(config)
        assert RunConfig.model_validate(data) == config


class TestLogging:
    """Tests for setup_logging"""

    def test_file_sink_receives_debug_records(self, tmp_path):
        """run.log captures records below the console level"""
        log_file = tmp_path / "run.log"
        setup_logging(level="WARNING", json=False, log_file=log_file)
        try:
            logger.debug("solver detail")
        finally:
            setup_logging(level="WARNING", json=False)
        assert "solver detail" in log_file.read_text()

    def test_json_sink(self, tmp_path):
        """Serialized records are one JSON object per line"""
        log_file = tmp_path / "run.jsonl"
        setup_logging(level="INFO", json=True, log_file=log_file)
        try:
            logger.info("structured", shapes=3)
        finally:
            setup_logging(level="WARNING", json=False)
        assert '"shapes": 3' in log_file.read_text()
