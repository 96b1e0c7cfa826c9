"""
Runtime settings for the contagion toolkit.
Values come from environment variables, optionally loaded from a .env file.
"""

import os

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')


def _default_threads() -> int:
    return os.cpu_count() or 1


SETTINGS = {
    'log_level': os.getenv('CONTAGION_LOG_LEVEL', 'INFO'),
    'log_file': os.getenv('CONTAGION_LOG_FILE', 'logs/contagion.log'),
    'output_dir': os.getenv('CONTAGION_OUTPUT_DIR', 'output'),
}


def default_threads() -> int:
    """Thread count from CONTAGION_THREADS, or the number of logical cores."""
    raw = os.getenv('CONTAGION_THREADS')
    if raw is None or raw.strip() == '':
        return _default_threads()
    try:
        threads = int(raw)
    except ValueError:
        raise ValueError(f"CONTAGION_THREADS must be a positive integer, got {raw!r}")
    if threads < 1:
        raise ValueError(f"CONTAGION_THREADS must be a positive integer, got {raw!r}")
    return threads


def validate_config():
    """Validate the environment-backed settings."""
    default_threads()
    level = os.getenv('CONTAGION_LOG_LEVEL', 'INFO').upper()
    if level not in LOG_LEVELS:
        raise ValueError(f"CONTAGION_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}, got {level!r}")
    if not os.getenv('CONTAGION_OUTPUT_DIR', 'output'):
        raise ValueError("CONTAGION_OUTPUT_DIR must not be empty")
    return True
