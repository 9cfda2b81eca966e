"""Tests for environment-driven configuration."""
from pathlib import Path

import pytest

from core.config import DEFAULT_TABLE_DIR, SearchConfig, config_manager
from core.exceptions import ConfigurationError


class TestConfigManager:
    """Test loading, overrides and validation."""

    def test_defaults(self, monkeypatch):
        for name in ("FIBCERT_TABLE_DIR", "FIBCERT_BASIS_SEARCH_BOUND", "FIBCERT_KERNEL_SEARCH_BOUND"):
            monkeypatch.delenv(name, raising=False)
        config_manager.reset()
        config = config_manager.config
        assert config.tables.table_dir == DEFAULT_TABLE_DIR
        assert config.tables.verify_checksums
        assert config.search.basis_search_bound == 6
        assert config.search.kernel_search_bound == 5

    def test_environment_overrides(self, monkeypatch, tmp_path):
        monkeypatch.setenv("FIBCERT_TABLE_DIR", str(tmp_path))
        monkeypatch.setenv("FIBCERT_KERNEL_SEARCH_BOUND", "2")
        monkeypatch.setenv("FIBCERT_VERIFY_CHECKSUMS", "false")
        config_manager.reset()
        config = config_manager.config
        assert config.tables.table_dir == Path(tmp_path)
        assert config.search.kernel_search_bound == 2
        assert not config.tables.verify_checksums

    def test_non_integer_bound(self, monkeypatch):
        monkeypatch.setenv("FIBCERT_BASIS_SEARCH_BOUND", "six")
        config_manager.reset()
        with pytest.raises(ConfigurationError):
            config_manager.config

    def test_bound_above_maximum(self, monkeypatch):
        monkeypatch.setenv("FIBCERT_KERNEL_SEARCH_BOUND", "21")
        config_manager.reset()
        with pytest.raises(ConfigurationError):
            config_manager.config

    def test_negative_bound(self):
        with pytest.raises(ConfigurationError):
            SearchConfig(form_search_bound=-1)

    def test_update_ignores_unknown_keys(self):
        config_manager.update_config(colour="blue", log_level="DEBUG")
        assert config_manager.config.log_level == "DEBUG"
        assert not hasattr(config_manager.config, "colour")
