import logging
import sys
from pathlib import Path
from typing import Optional

from core.config import config_manager

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def get_logger(name: str, level: Optional[str] = None) -> logging.Logger:
    """
    Return a logger configured with standard settings for the application.

    Console output goes to stderr so that command output on stdout stays
    byte-for-byte reproducible.

    Args:
        name: The name of the logger, typically __name__ from the calling module
        level: Console level; defaults to the configured LOG_LEVEL

    Returns:
        A configured logger instance
    """
    config = config_manager.config
    logs_dir = Path(config.log_dir)
    if not logs_dir.is_absolute():
        logs_dir = Path(__file__).parent.parent / logs_dir
    logs_dir.mkdir(parents=True, exist_ok=True)

    logger = logging.getLogger(name)

    if not logger.handlers:
        logger.setLevel(logging.DEBUG)

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel((level or config.log_level).upper())

        file_handler = logging.FileHandler(logs_dir / "app.log")
        file_handler.setLevel(logging.DEBUG)

        formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
        console_handler.setFormatter(formatter)
        file_handler.setFormatter(formatter)

        logger.addHandler(console_handler)
        logger.addHandler(file_handler)

    return logger
