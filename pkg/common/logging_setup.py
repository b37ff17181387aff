"""
Logging setup and configuration for the Code Curator toolkit.

This module provides:
- Standard logging configuration
- Rotating file handler plus a console handler on stderr
  (stdout is reserved for machine-readable command output)
- Structured stage/error logging with event metadata
"""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Optional

from common.config import AppSettings, get_settings


STANDARD_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DETAILED_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def setup_logging(
    log_level: Optional[str] = None,
    log_file: Optional[str] = None,
    settings: Optional[AppSettings] = None,
    quiet: Optional[bool] = None,
) -> None:
    """
    Setup logging configuration for the application.

    This function configures:
    - Log level (from settings or parameter)
    - File handler with rotation
    - Console handler on stderr, WARNING-only when quiet

    Args:
        log_level (str, optional): Override log level from settings
        log_file (str, optional): Override log file path from settings
        settings (AppSettings, optional): Settings object. If None, uses global settings.
        quiet (bool, optional): Override QUIET from settings
    """
    if settings is None:
        settings = get_settings()

    level = (log_level or settings.effective_log_level()).upper()
    numeric_level = getattr(logging, level, logging.INFO)
    quiet = settings.QUIET if quiet is None else quiet

    if log_file is None:
        log_file = settings.LOG_FILE

    log_file_path = Path(log_file)
    log_file_path.parent.mkdir(parents=True, exist_ok=True)

    root_logger = logging.getLogger()
    root_logger.setLevel(numeric_level)

    # Clear any existing handlers
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)
        handler.close()

    file_handler = logging.handlers.RotatingFileHandler(
        filename=log_file_path,
        maxBytes=10 * 1024 * 1024,  # 10MB
        backupCount=5,
        encoding='utf-8'
    )
    file_handler.setLevel(numeric_level)
    file_handler.setFormatter(logging.Formatter(DETAILED_FORMAT, datefmt=DATE_FORMAT))

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.WARNING if quiet else numeric_level)
    console_handler.setFormatter(logging.Formatter(STANDARD_FORMAT, datefmt=DATE_FORMAT))

    root_logger.addHandler(file_handler)
    root_logger.addHandler(console_handler)

    logger = logging.getLogger(__name__)
    logger.debug(f"Logging setup complete - Level: {level}, File: {log_file_path}, Quiet: {quiet}")


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger instance with the specified name.

    Args:
        name (str): Logger name (usually __name__)

    Returns:
        logging.Logger: Logger instance
    """
    return logging.getLogger(name)


class StructuredLogger:
    """
    Structured logger that provides consistent logging across the pipeline.

    Every record carries an `event_type` plus event fields in `extra`, so a
    JSON formatter attached later can emit them without changing call sites.
    """

    def __init__(self, name: str):
        """
        Initialize the structured logger.

        Args:
            name (str): Logger name
        """
        self.logger = logging.getLogger(name)

    def log_stage(self, stage: str, input_count: int, output_count: int, duration: float):
        """
        Log pipeline stage results.

        Args:
            stage (str): Name of the pipeline stage
            input_count (int): Number of input items
            output_count (int): Number of output items
            duration (float): Time taken in seconds
        """
        self.logger.info(
            f"Stage {stage} completed: {input_count} in, {output_count} out, {duration:.3f}s",
            extra={
                'stage': stage,
                'input_count': input_count,
                'output_count': output_count,
                'duration_seconds': duration,
                'event_type': 'pipeline_stage'
            }
        )

    def log_error(self, error: str, context: Optional[dict] = None):
        """
        Log an error with context.

        Args:
            error (str): Error description
            context (dict, optional): Additional context information
        """
        extra = {'event_type': 'error'}
        if context:
            extra.update(context)

        self.logger.error(error, extra=extra)

    def log_warning(self, warning: str, context: Optional[dict] = None):
        """
        Log a warning with context.

        Args:
            warning (str): Warning description
            context (dict, optional): Additional context information
        """
        extra = {'event_type': 'warning'}
        if context:
            extra.update(context)

        self.logger.warning(warning, extra=extra)
