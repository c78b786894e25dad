#!/usr/bin/env python
"""
Interaction log loading and example file IO.

Supported inputs:
- MovieLens ``.dat``: ``userId::movieId::rating::timestamp``
- Generic TSV: ``user<TAB>item<TAB>rating<TAB>timestamp`` with an optional
  header line

Events are returned as a DataFrame with columns user (str), item (str),
rating (float) and timestamp (int), in file order.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple, Union

import pandas as pd

from core.exceptions import UnknownFormatError, UnreadableInputError
from core.logger import log_info, log_warning

logger = logging.getLogger(__name__)

EVENT_COLUMNS = ["user", "item", "rating", "timestamp"]
EXAMPLE_COLUMNS = ["user", "phase", "context", "target"]

PathLike = Union[str, Path]


class InputFormat(str, Enum):
    MOVIELENS_DAT = "movielens"
    GENERIC_TSV = "tsv"

    @classmethod
    def parse(cls, value: Union[str, "InputFormat"]) -> "InputFormat":
        if isinstance(value, InputFormat):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(f.value for f in cls)
            raise UnknownFormatError(f"unknown input format {value!r} (expected one of: {names})") from None


@dataclass(frozen=True)
class IngestResult:
    events: pd.DataFrame
    skipped: int
    skipped_lines: Tuple[int, ...]  # 1-based line numbers


def empty_events() -> pd.DataFrame:
    return pd.DataFrame({
        "user": pd.Series(dtype=str),
        "item": pd.Series(dtype=str),
        "rating": pd.Series(dtype=float),
        "timestamp": pd.Series(dtype="int64"),
    })


def _parse_fields(fields: List[str]) -> Optional[Tuple[str, str, float, int]]:
    if len(fields) != 4:
        return None
    user, item, rating, timestamp = (f.strip() for f in fields)
    if not user or not item:
        return None
    try:
        rating_value = float(rating)
        ts_value = int(timestamp)
    except ValueError:
        return None
    if ts_value < 0 or rating_value != rating_value:
        return None
    return user, item, rating_value, ts_value


def _is_header(fields: List[str]) -> bool:
    return bool(fields) and fields[0].strip().lower() in {"user", "user_id", "userid"}


def ingest(path: PathLike, fmt: Union[str, InputFormat]) -> IngestResult:
    """
    Parse an interaction log.

    Malformed lines (wrong field count, non-numeric rating or timestamp,
    negative timestamp) are counted and skipped.

    Args:
        path: Input file
        fmt: ``movielens`` or ``tsv``

    Returns:
        IngestResult with the parsed events and the skip report

    Raises:
        UnknownFormatError: If ``fmt`` is not a supported format
        UnreadableInputError: If the file cannot be read
    """
    input_format = InputFormat.parse(fmt)
    try:
        text = Path(path).read_text(encoding="utf-8", errors="replace")
    except OSError as exc:
        raise UnreadableInputError(f"cannot read {path}: {exc}") from exc

    separator = "::" if input_format is InputFormat.MOVIELENS_DAT else "\t"
    rows = []
    skipped: List[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split(separator)
        if lineno == 1 and input_format is InputFormat.GENERIC_TSV and _is_header(fields):
            continue
        parsed = _parse_fields(fields)
        if parsed is None:
            skipped.append(lineno)
            continue
        rows.append(parsed)

    events = pd.DataFrame(rows, columns=EVENT_COLUMNS) if rows else empty_events()
    events = events.astype({"user": str, "item": str, "rating": float, "timestamp": "int64"})
    if skipped:
        log_warning(
            "ingest_skipped_lines",
            f"Skipped {len(skipped)} malformed line(s) in {path}",
            additional={"path": path, "skipped": len(skipped), "first_lines": skipped[:10]},
        )
    log_info(
        "ingest_complete",
        f"Parsed {len(events)} events from {path}",
        additional={"path": path, "format": input_format.value, "events": len(events)},
    )
    return IngestResult(events=events, skipped=len(skipped), skipped_lines=tuple(skipped))


def save_events_tsv(events: pd.DataFrame, path: PathLike) -> Path:
    """Write events as a header-bearing generic TSV."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    frame = events[EVENT_COLUMNS].copy()
    frame["rating"] = frame["rating"].map(lambda r: f"{r:g}")
    frame.to_csv(target, sep="\t", index=False)
    return target


def save_examples_tsv(examples: pd.DataFrame, path: PathLike) -> Path:
    """
    Write window examples as ``user phase context target`` rows.

    The context is comma-joined; row order is the stream order.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({
        "user": examples["user"].astype(str),
        "phase": examples["phase"].astype(str),
        "context": examples["context"].map(lambda items: ",".join(str(i) for i in items)),
        "target": examples["target"].astype(str),
    })
    frame.to_csv(target, sep="\t", index=False, lineterminator="\n")
    return target


def load_examples_tsv(path: PathLike) -> pd.DataFrame:
    """
    Read an example file written by ``save_examples_tsv``.

    Raises:
        UnreadableInputError: If the file is missing or lacks the expected columns
    """
    try:
        frame = pd.read_csv(path, sep="\t", dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError) as exc:
        raise UnreadableInputError(f"cannot read examples from {path}: {exc}") from exc
    missing = [c for c in EXAMPLE_COLUMNS if c not in frame.columns]
    if missing:
        raise UnreadableInputError(f"{path}: missing column(s) {', '.join(missing)}")
    frame = frame[EXAMPLE_COLUMNS].copy()
    frame["context"] = frame["context"].map(lambda text: tuple(text.split(",")) if text else ())
    return frame.reset_index(drop=True)
