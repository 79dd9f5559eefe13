"""
Logging setup for the discount term-structure engine.

Uses Python's built-in logging + Rich for readable console output.
Console output goes to stderr so CSV/JSON artifacts and stdout stay clean.
"""

import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path

from rich.console import Console
from rich.logging import RichHandler

from src.core.config import PROJECT_ROOT, get_settings
from src.core.exceptions import ConfigError

_is_setup_done = False


def setup_logging():
    """Configure logging. Call once at startup (get_logger does it lazily)."""
    global _is_setup_done

    if _is_setup_done:
        return

    try:
        settings = get_settings()
    except ConfigError:
        # bad settings are reported by the caller; log to the console meanwhile
        settings = None
    level = getattr(logging, settings.log_level.upper()) if settings is not None else logging.INFO

    # Root logger
    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers.clear()

    # Console handler (pretty output on stderr)
    console_handler = RichHandler(
        console=Console(stderr=True),
        show_time=True,
        show_path=False,
        rich_tracebacks=True,
    )
    console_handler.setLevel(level)
    root_logger.addHandler(console_handler)

    # File handler (rotating log files); empty log_file disables it
    if settings is not None and settings.log_file:
        log_path = Path(settings.log_file)
        if not log_path.is_absolute():
            log_path = PROJECT_ROOT / log_path
        log_path.parent.mkdir(parents=True, exist_ok=True)

        file_handler = RotatingFileHandler(
            filename=log_path,
            maxBytes=50 * 1024 * 1024,
            backupCount=5,
            encoding="utf-8",
        )
        file_format = logging.Formatter(
            "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
        file_handler.setFormatter(file_format)
        root_logger.addHandler(file_handler)

    _is_setup_done = settings is not None


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger for any module.

    Usage:
        logger = get_logger(__name__)
        logger.info("Simulation started")
    """
    setup_logging()
    return logging.getLogger(name)
