"""Common utility functions for the neuromorphic aging simulator."""

import csv
import hashlib
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from .exceptions import ConfigurationError
from .models import ReportStamp

logger = logging.getLogger("neuro_aging_sim")

PathLike = Union[str, Path]


LOG_FORMAT = "%(asctime)s %(levelname)-8s [pid %(process)d] %(message)s"
LOG_DATE_FORMAT = "%Y-%m-%dT%H:%M:%S"


def setup_logger(
    level: str = "INFO",
    log_file: Optional[PathLike] = None,
    log_format: str = LOG_FORMAT,
) -> logging.Logger:
    """Route the ``neuro_aging_sim`` logger to stderr and, optionally, a file.

    Records carry the process id, since sweep cells log from worker
    processes into the same stream. Handlers installed by an earlier call
    are closed and replaced.

    Args:
        level: Level name (DEBUG, INFO, WARNING, ERROR, CRITICAL), any case
        log_file: File the log is appended to as well
        log_format: Record format

    Returns:
        Configured logger

    Raises:
        ConfigurationError: If the level name is unknown
        OSError: If the log file cannot be opened
    """
    numeric_level = logging.getLevelName(level.upper())
    if not isinstance(numeric_level, int):
        raise ConfigurationError(f"unknown log level {level!r}", field="log_level")

    logger = logging.getLogger("neuro_aging_sim")
    logger.setLevel(numeric_level)
    for handler in logger.handlers[:]:
        logger.removeHandler(handler)
        handler.close()

    formatter = logging.Formatter(log_format, datefmt=LOG_DATE_FORMAT)
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, mode="a", encoding="utf-8"))
    for handler in handlers:
        handler.setFormatter(formatter)
        logger.addHandler(handler)
    return logger


def filter_dict(data: Dict[str, Any]) -> Dict[str, Any]:
    """Filter out None values from a dictionary.

    Args:
        data: Dictionary to filter

    Returns:
        Filtered dictionary
    """
    return {k: v for k, v in data.items() if v is not None}


def check_keys(section: str, data: Dict[str, Any], allowed: Iterable[str]) -> None:
    """Reject configuration keys outside the documented schema.

    Args:
        section: Name of the configuration section, used in diagnostics
        data: Raw section contents
        allowed: Keys accepted by the section

    Raises:
        ConfigurationError: If data is not a table or carries an unknown key
    """
    if not isinstance(data, dict):
        raise ConfigurationError(f"section must be a table, got {type(data).__name__}", field=section)
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        name = f"{section}.{unknown[0]}" if section else unknown[0]
        raise ConfigurationError(f"unknown key '{unknown[0]}'", field=name)


def _jsonable(value: Any) -> Any:
    """Map non-finite floats to strings so the JSON output stays standard."""
    if isinstance(value, float) and not math.isfinite(value):
        return "inf" if value > 0 else ("-inf" if value < 0 else "nan")
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def canonical_json(data: Dict[str, Any]) -> str:
    """Serialize a dictionary deterministically (sorted keys, fixed separators)."""
    return json.dumps(_jsonable(data), sort_keys=True, separators=(",", ":"))


def config_hash(data: Dict[str, Any]) -> str:
    """Hash a configuration echo.

    Args:
        data: Configuration dictionary

    Returns:
        First 16 hex digits of the SHA-256 of the canonical JSON form
    """
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()[:16]


def format_value(value: Any) -> str:
    """Format a report cell.

    Floats use ``repr`` (shortest round-trip form), so identical runs give
    identical bytes.
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def write_csv(
    path: PathLike,
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    stamp: Optional[ReportStamp] = None,
) -> Path:
    """Write a CSV report with a header row.

    Args:
        path: Output file
        header: Column names
        rows: Row values, formatted with :func:`format_value`
        stamp: Optional run identity written as a leading ``#`` line

    Returns:
        Path of the written file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        if stamp is not None:
            handle.write(stamp.as_comment() + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        count = 0
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            count += 1
    logger.debug(f"Wrote {count} rows to {path}")
    return path


def write_json(path: PathLike, data: Dict[str, Any]) -> Path:
    """Write a JSON document with sorted keys and a trailing newline.

    Args:
        path: Output file
        data: Document

    Returns:
        Path of the written file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(data), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    logger.debug(f"Wrote {path}")
    return path


def coerce_float(field: str, value: Any) -> float:
    """Read a numeric configuration value.

    Accepts ints, floats and the strings ``"inf"``/``"infinity"`` (JSON has
    no literal for infinity).

    Raises:
        ConfigurationError: If the value is not numeric
    """
    if isinstance(value, bool):
        raise ConfigurationError(f"expected a number, got {value!r}", field=field)
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str) and value.strip().lower() in ("inf", "+inf", "infinity"):
        return math.inf
    raise ConfigurationError(f"expected a number, got {value!r}", field=field)


def coerce_int(field: str, value: Any) -> int:
    """Read an integer configuration value.

    Raises:
        ConfigurationError: If the value is not an integer
    """
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"expected an integer, got {value!r}", field=field)
    return value
