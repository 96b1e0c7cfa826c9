"""
Command-line entry point for the contagion toolkit.

Usage:
    python main.py check --config configs/shot_noise.toml
    python main.py verify --config configs/benchmark.toml --out output
"""

import sys

from src.cli import run


def main():
    """Run one subcommand and exit with its status code."""
    sys.exit(run(sys.argv[1:]))


if __name__ == '__main__':
    main()
