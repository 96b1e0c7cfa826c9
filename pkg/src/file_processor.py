"""
File utilities for run configurations and result files.
"""

import json
import logging
import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict

import chardet
import pandas as pd

from .errors import ModelValidationError

CONFIG_SUFFIXES = ('.toml', '.json')


def _clean_json(value: Any) -> Any:
    """Replace non-finite floats with None so the output stays strict JSON."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _clean_json(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean_json(v) for v in value]
    return value


class FileProcessor:
    """Reads run configurations and writes reports and series."""

    def __init__(self, logger: logging.Logger):
        self.logger = logger

    def validate_file_exists(self, file_path: str) -> bool:
        path = Path(file_path)
        return path.exists() and path.is_file()

    def detect_encoding(self, file_path: str) -> str:
        """Detect the encoding of a file, falling back to UTF-8."""
        try:
            with open(file_path, 'rb') as file:
                result = chardet.detect(file.read())
            encoding = result['encoding'] or 'utf-8'
            # chardet reports plain ASCII for most configs; read it as UTF-8
            return 'utf-8' if encoding.lower() == 'ascii' else encoding
        except Exception as e:
            self.logger.error(f"Error detecting encoding for {file_path}: {str(e)}")
            return 'utf-8'

    def read_config(self, file_path: str) -> Dict[str, Any]:
        """
        Read a TOML or JSON run configuration into a dictionary.

        Args:
            file_path: Path to a .toml or .json file

        Returns:
            Parsed configuration

        Raises:
            FileNotFoundError: If the file does not exist
            ModelValidationError: On unsupported formats or syntax errors,
                with the line and column of the problem when known
        """
        if not self.validate_file_exists(file_path):
            raise FileNotFoundError(f"Config file not found: {file_path}")

        suffix = Path(file_path).suffix.lower()
        if suffix not in CONFIG_SUFFIXES:
            raise ModelValidationError(f"Unsupported config format '{suffix}' (expected .toml or .json)")

        try:
            if suffix == '.toml':
                data = self._read_toml(file_path)
            else:
                data = self._read_json(file_path)
        except ModelValidationError as e:
            self.logger.error(f"Error reading config {file_path}: {str(e)}")
            raise

        if not isinstance(data, dict):
            raise ModelValidationError("Config root must be a table/object", line=1, column=1)
        self.logger.info(f"Loaded config {file_path} with blocks: {', '.join(sorted(data)) or '(none)'}")
        return data

    def _read_toml(self, file_path: str) -> Dict[str, Any]:
        with open(file_path, 'rb') as file:
            try:
                return tomllib.load(file)
            except tomllib.TOMLDecodeError as e:
                # tomllib only carries the position inside the message
                message = str(e)
                line, column = _toml_position(message)
                raise ModelValidationError(f"TOML syntax error: {message.split(' (at')[0]}", line, column)

    def _read_json(self, file_path: str) -> Dict[str, Any]:
        encoding = self.detect_encoding(file_path)
        self.logger.debug(f"Detected encoding: {encoding} for {file_path}")
        with open(file_path, 'r', encoding=encoding) as file:
            try:
                return json.load(file)
            except json.JSONDecodeError as e:
                raise ModelValidationError(f"JSON syntax error: {e.msg}", e.lineno, e.colno)

    def write_json(self, data: Dict[str, Any], file_path: str) -> None:
        """Write a report with sorted keys; NaN and infinities become null."""
        try:
            path = Path(file_path)
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, 'w', encoding='utf-8') as file:
                json.dump(_clean_json(data), file, indent=2, sort_keys=True, allow_nan=False)
                file.write('\n')
            self.logger.info(f"Wrote {path}")
        except Exception as e:
            self.logger.error(f"Error writing {file_path}: {str(e)}")
            raise

    def write_csv(self, df: pd.DataFrame, file_path: str) -> None:
        try:
            path = Path(file_path)
            path.parent.mkdir(parents=True, exist_ok=True)
            df.to_csv(path, index=False, float_format='%.17g', lineterminator='\n')
            self.logger.info(f"Wrote {len(df)} rows to {path}")
        except Exception as e:
            self.logger.error(f"Error writing {file_path}: {str(e)}")
            raise

    def append_csv(self, df: pd.DataFrame, file_path: str, header: bool) -> None:
        """Append rows; ``header=True`` starts the file afresh."""
        try:
            path = Path(file_path)
            if header:
                path.parent.mkdir(parents=True, exist_ok=True)
            df.to_csv(path, mode='w' if header else 'a', header=header, index=False,
                      float_format='%.17g', lineterminator='\n')
            self.logger.debug(f"Appended {len(df)} rows to {path}")
        except Exception as e:
            self.logger.error(f"Error writing {file_path}: {str(e)}")
            raise


def dumps_json(data: Dict[str, Any]) -> str:
    return json.dumps(_clean_json(data), indent=2, sort_keys=True, allow_nan=False)


def _toml_position(message: str):
    marker = '(at line '
    if marker not in message:
        return None, None
    tail = message.split(marker, 1)[1].rstrip(')')
    try:
        line_part, column_part = tail.split(', column ')
        return int(line_part), int(column_part)
    except ValueError:
        return None, None
