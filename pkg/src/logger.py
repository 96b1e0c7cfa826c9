"""
Logging configuration utilities.
"""

import logging
import sys
from pathlib import Path
from typing import Optional

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


class LoggerFactory:
    """Factory for creating configured loggers."""

    @staticmethod
    def create_logger(name: str, log_level: str = 'INFO', log_file: Optional[str] = None) -> logging.Logger:
        """
        Create a configured logger.

        The console handler writes to stderr at ``log_level`` so that reports
        printed on stdout stay machine-readable. The file handler, when a
        path is given, records everything from DEBUG up.

        Args:
            name: Logger name
            log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
            log_file: Optional log file path

        Returns:
            Configured logger instance

        Raises:
            ValueError: If ``log_level`` is not a logging level name
        """
        level = logging.getLevelName(log_level.upper())
        if not isinstance(level, int):
            raise ValueError(f"Unknown log level: {log_level}")

        logger = logging.getLogger(name)
        logger.setLevel(logging.DEBUG if log_file else level)
        logger.propagate = False

        # Clear existing handlers to avoid duplicates
        logger.handlers.clear()

        formatter = logging.Formatter(LOG_FORMAT)

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setLevel(level)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

        if log_file:
            Path(log_file).parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_file)
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

        return logger
