"""Logging configuration and utilities."""

# ================================== Imports ================================== #
# Standard Library
import sys
from pathlib import Path
from typing import Any, Optional

# Third-party
from loguru import logger
from rich.console import Console
from rich.logging import RichHandler

PLAIN_FORMAT = (
    "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <8} | "
    "{name}:{function}:{line} - {message}"
)


# ================================== Functions ================================ #
def setup_logger(
    log_file: Optional[Path] = None,
    log_level: str = "INFO",
    enable_rich: bool = True,
    enable_json: bool = False,
) -> None:
    """Configure Loguru logger with rich console output and file logging.

    Console output always goes to stderr: stdout carries the CSV/JSON
    artifacts emitted by the CLI.

    Args:
        log_file: Path to log file. If None, only console logging is enabled.
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL).
        enable_rich: Whether to use Rich for console formatting.
        enable_json: Whether to use JSON formatting for file logs.
    """
    logger.remove()

    if enable_rich:
        logger.add(
            RichHandler(
                console=Console(stderr=True),
                rich_tracebacks=True,
                show_path=False,
                markup=True,
            ),
            level=log_level,
            format="{message}",
            backtrace=True,
        )
    else:
        logger.add(
            sys.stderr,
            level=log_level,
            format=PLAIN_FORMAT,
            backtrace=True,
            colorize=False,
        )

    if log_file:
        log_file.parent.mkdir(parents=True, exist_ok=True)
        logger.add(
            log_file,
            level="DEBUG",
            rotation="10 MB",
            retention="30 days",
            enqueue=True,
            backtrace=True,
            serialize=enable_json,
            format=PLAIN_FORMAT,
        )

    logger.debug("Logger configured (level={})", log_level)


def get_experiment_logger(experiment: str, **context: Any) -> Any:
    """Get a logger instance bound to an experiment's context.

    Args:
        experiment: Name of the verification experiment.
        **context: Extra fields (N, beta, seed, ...) to attach to every record.

    Returns:
        Logger instance with experiment context.
    """
    return logger.bind(experiment=experiment, component="verify", **context)
