"""
Structured JSON logger for the region editor.

This module provides a centralized logging mechanism that writes structured
JSON log entries to daily log files in newline-delimited format (.jsonl).

Each log entry contains:
- timestamp: ISO 8601 format
- level: INFO, WARNING, ERROR
- arm: Experiment arm (if applicable)
- event: Short keyword describing the event
- message: Human-readable message
- additional: Optional dictionary of additional data

Log files are stored in the directory named by ``RAIE_LOG_DIR`` (default
``logs/``) with naming pattern log_<YYYYMMDD>.jsonl.
"""
import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

from rich.logging import RichHandler

from core.config.console import console
from core.config.settings import get_runtime_settings

LOG_LEVELS = ["INFO", "WARNING", "ERROR"]


def get_log_dir() -> Path:
    """Resolve the log directory from the runtime settings and create it."""
    log_dir = Path(get_runtime_settings().log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)
    return log_dir


def get_log_filename() -> Path:
    """
    Generate the log filename for the current date.

    Returns:
        Path: Path to the log file
    """
    today = datetime.now().strftime("%Y%m%d")
    return get_log_dir() / f"log_{today}.jsonl"


def _jsonable(value: Any) -> Any:
    """Coerce numpy scalars and paths into JSON-friendly values."""
    if hasattr(value, "item") and callable(value.item):
        try:
            return value.item()
        except (TypeError, ValueError):
            pass
    if isinstance(value, Path):
        return str(value)
    return value


def log_event(
    level: str,
    event: str,
    message: str,
    arm: Optional[str] = None,
    additional: Optional[Dict[str, Any]] = None
) -> Dict[str, Any]:
    """
    Log an event in JSON format to the daily log file.

    Args:
        level (str): Log level - INFO, WARNING, ERROR
        event (str): Event type keyword (e.g., regions_built)
        message (str): Human-readable message
        arm (str, optional): Experiment arm if applicable
        additional (Dict[str, Any], optional): Additional data to include

    Returns:
        Dict[str, Any]: The log entry that was written
    """
    level = level.upper()
    if level not in LOG_LEVELS:
        level = "INFO"

    timestamp = datetime.now().isoformat(timespec='seconds')
    log_entry: Dict[str, Any] = {
        "timestamp": timestamp,
        "level": level,
        "event": event,
        "message": message
    }

    if arm:
        log_entry["arm"] = arm

    if additional:
        log_entry.update({key: _jsonable(value) for key, value in additional.items()})

    with open(get_log_filename(), "a", encoding="utf-8") as f:
        f.write(json.dumps(log_entry, default=str) + "\n")
        f.flush()

    return log_entry


def log_info(
    event: str,
    message: str,
    arm: Optional[str] = None,
    additional: Optional[Dict[str, Any]] = None
) -> Dict[str, Any]:
    """Log an INFO level event."""
    return log_event("INFO", event, message, arm, additional)


def log_warning(
    event: str,
    message: str,
    arm: Optional[str] = None,
    additional: Optional[Dict[str, Any]] = None
) -> Dict[str, Any]:
    """Log a WARNING level event."""
    return log_event("WARNING", event, message, arm, additional)


def log_error(
    event: str,
    message: str,
    arm: Optional[str] = None,
    exception: Optional[Exception] = None,
    additional: Optional[Dict[str, Any]] = None
) -> Dict[str, Any]:
    """
    Log an ERROR level event.

    Args:
        event (str): Event type keyword
        message (str): Human-readable message
        arm (str, optional): Experiment arm if applicable
        exception (Exception, optional): Exception object if available
        additional (Dict[str, Any], optional): Additional data to include

    Returns:
        Dict[str, Any]: The log entry that was written
    """
    if exception:
        additional = dict(additional or {})
        additional["exception"] = {
            "type": type(exception).__name__,
            "message": str(exception)
        }

    return log_event("ERROR", event, message, arm, additional)


def setup_logging(log_level: Optional[str] = None) -> None:
    """Configure stdlib logging with rich console output.

    Args:
        log_level: Logging level name; defaults to ``RAIE_LOG_LEVEL``
    """
    level_name = (log_level or get_runtime_settings().log_level).upper()
    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[
            RichHandler(
                console=console,
                rich_tracebacks=True,
                show_time=False,
            ),
        ],
        force=True,
    )
