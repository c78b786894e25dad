"""
Right-aligned sliding windows within each user's phase segment.

For a segment of m chronologically ordered events the targets are the
positions m-1, m-1-n, m-1-2n, ... down to 1. Each target's context is the last
``window_length`` earlier events of the same segment whose timestamp is
strictly below the target's, so no example ever crosses a phase boundary or
sees an event at the target's own timestamp.
"""
from bisect import bisect_left
from typing import List

import pandas as pd

from core.config.constants import DEFAULT_STRIDE, DEFAULT_WINDOW_LENGTH
from core.data.splitter import PHASES

WINDOW_COLUMNS = ["user", "phase", "context", "target", "target_ts", "context_ts", "position"]


def empty_windows() -> pd.DataFrame:
    return pd.DataFrame({column: pd.Series(dtype=object) for column in WINDOW_COLUMNS})


def segment_windows(
    tagged: pd.DataFrame,
    window_length: int = DEFAULT_WINDOW_LENGTH,
    stride: int = DEFAULT_STRIDE,
) -> pd.DataFrame:
    """
    Build window examples from phase-tagged events.

    Args:
        tagged: Events with user, item, timestamp and phase columns
        window_length: Maximum context length l_w
        stride: Step n between consecutive targets

    Returns:
        One row per example with columns user, phase, context (tuple of
        items), target, target_ts, context_ts (tuple) and position (index of
        the target within its segment). Rows are ordered by target timestamp,
        then user, then position, which is the stream order.
    """
    if window_length < 1 or stride < 1:
        raise ValueError("window_length and stride must be >= 1")
    if tagged.empty:
        return empty_windows()

    ordered = tagged.reset_index(drop=True)
    ordered = ordered.assign(_row=range(len(ordered)))
    ordered = ordered.sort_values(["user", "phase", "timestamp", "_row"], kind="mergesort")

    rows: List[dict] = []
    for (user, phase), segment in ordered.groupby(["user", "phase"], sort=True):
        if phase not in PHASES:
            raise ValueError(f"unknown phase tag {phase!r}")
        items = segment["item"].tolist()
        stamps = segment["timestamp"].tolist()
        for position in range(len(items) - 1, 0, -stride):
            target_ts = stamps[position]
            end = bisect_left(stamps, target_ts, 0, position)
            if end == 0:
                continue
            chosen = range(max(0, end - window_length), end)
            rows.append({
                "user": user,
                "phase": phase,
                "context": tuple(items[i] for i in chosen),
                "target": items[position],
                "target_ts": int(target_ts),
                "context_ts": tuple(int(stamps[i]) for i in chosen),
                "position": position,
            })

    if not rows:
        return empty_windows()
    windows = pd.DataFrame(rows, columns=WINDOW_COLUMNS)
    windows = windows.sort_values(["target_ts", "user", "position"], kind="mergesort")
    return windows.reset_index(drop=True)
