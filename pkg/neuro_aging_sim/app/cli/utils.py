"""Utility functions for the command-line runner."""

import functools
import json
import logging
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Callable, Dict

from ..common.exceptions import AgingSimError, ConfigurationError, ConvergenceError, InternalError
from ..common.utils import PathLike

logger = logging.getLogger("neuro_aging_sim")

EXIT_OK = 0
EXIT_USER_ERROR = 2
EXIT_INTERNAL_ERROR = 3


def read_document(path: PathLike) -> Dict[str, Any]:
    """Parse a TOML or JSON file into a dictionary, chosen by suffix.

    Raises:
        FileNotFoundError: If the file does not exist
        ConfigurationError: If the format is unsupported or the file does not parse
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix not in (".toml", ".json"):
        raise ConfigurationError(f"unsupported config format '{suffix}' for {path}", field="config")
    text = path.read_text(encoding="utf-8")
    try:
        data = tomllib.loads(text) if suffix == ".toml" else json.loads(text)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as exc:
        logger.error(f"Could not parse {path}: {exc}")
        raise ConfigurationError(f"{path}: {exc}", field="config") from exc
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a table", field="config")
    return data


def exit_code_for(exc: BaseException) -> int:
    """Process exit code for an exception escaping a command."""
    if isinstance(exc, (ConvergenceError, InternalError)):
        return EXIT_INTERNAL_ERROR
    return EXIT_USER_ERROR


def command(func: Callable[..., int]) -> Callable[..., int]:
    """Turn simulator and file errors raised by a command into exit codes.

    The diagnostic goes to the log and to stderr.
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs) -> int:
        try:
            return func(*args, **kwargs)
        except (AgingSimError, OSError) as exc:
            code = exit_code_for(exc)
            logger.error(f"{func.__name__} failed with exit code {code}: {exc}")
            print(f"Error: {exc}", file=sys.stderr)
            return code

    return wrapper
