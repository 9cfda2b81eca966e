"""Configuration management with validation and environment support."""
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from core.exceptions import ConfigurationError

# Load environment variables from .env file
load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_TABLE_DIR = Path(__file__).resolve().parent.parent / "homotopy" / "tables"


@dataclass
class TableConfig:
    """Location and integrity settings for the shipped homotopy tables."""
    table_dir: Path = DEFAULT_TABLE_DIR
    verify_checksums: bool = True

    def __post_init__(self) -> None:
        self.table_dir = Path(self.table_dir)


@dataclass
class SearchConfig:
    """Bounds for every exhaustive search in the repository."""
    form_search_bound: int = 4
    basis_search_bound: int = 6
    kernel_search_bound: int = 5
    max_search_bound: int = 20

    def __post_init__(self) -> None:
        for name in ("form_search_bound", "basis_search_bound", "kernel_search_bound"):
            value = getattr(self, name)
            if value < 0:
                raise ConfigurationError(f"{name} must be nonnegative, got {value}")
            if value > self.max_search_bound:
                raise ConfigurationError(
                    f"{name}={value} exceeds max_search_bound={self.max_search_bound}"
                )


@dataclass
class OracleConfig:
    """Limits for the brute-force quotient rank oracle."""
    max_rank: int = 8
    degree_factor: int = 4

    def __post_init__(self) -> None:
        if self.max_rank < 1 or self.degree_factor < 1:
            raise ConfigurationError("oracle limits must be positive")


@dataclass
class HilbertConfig:
    """Limits for series expansions."""
    max_order: int = 64


@dataclass
class AppConfig:
    """Main application configuration."""
    tables: TableConfig = field(default_factory=TableConfig)
    search: SearchConfig = field(default_factory=SearchConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    hilbert: HilbertConfig = field(default_factory=HilbertConfig)
    log_level: str = "INFO"
    log_dir: str = "logs"


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigurationError(f"{name} must be an integer, got {raw!r}") from e


class ConfigManager:
    """Centralized configuration management."""

    def __init__(self):
        self._config: Optional[AppConfig] = None

    @property
    def config(self) -> AppConfig:
        """Get configuration, loading it if not already loaded."""
        if self._config is None:
            self._config = self._load_config()
        return self._config

    def _load_config(self) -> AppConfig:
        """Load configuration from environment variables."""
        table_config = TableConfig(
            table_dir=Path(os.getenv("FIBCERT_TABLE_DIR", str(DEFAULT_TABLE_DIR))),
            verify_checksums=os.getenv("FIBCERT_VERIFY_CHECKSUMS", "true").lower() == "true",
        )

        search_config = SearchConfig(
            form_search_bound=_env_int("FIBCERT_FORM_SEARCH_BOUND", 4),
            basis_search_bound=_env_int("FIBCERT_BASIS_SEARCH_BOUND", 6),
            kernel_search_bound=_env_int("FIBCERT_KERNEL_SEARCH_BOUND", 5),
        )

        oracle_config = OracleConfig(
            max_rank=_env_int("FIBCERT_ORACLE_MAX_RANK", 8),
            degree_factor=_env_int("FIBCERT_ORACLE_DEGREE_FACTOR", 4),
        )

        hilbert_config = HilbertConfig(max_order=_env_int("FIBCERT_HILBERT_MAX_ORDER", 64))

        return AppConfig(
            tables=table_config,
            search=search_config,
            oracle=oracle_config,
            hilbert=hilbert_config,
            log_level=os.getenv("LOG_LEVEL", "INFO"),
            log_dir=os.getenv("FIBCERT_LOG_DIR", "logs"),
        )

    def update_config(self, **kwargs) -> None:
        """Update configuration values for testing."""
        if self._config is None:
            self._config = self._load_config()

        for key, value in kwargs.items():
            if hasattr(self._config, key):
                setattr(self._config, key, value)
            else:
                logger.warning("Ignoring unknown configuration key %s", key)

    def reset(self) -> None:
        """Drop the cached configuration so the next access reloads it."""
        self._config = None


# Global configuration manager instance
config_manager = ConfigManager()
