"""
Dataset-level temporal split into Set-up, Finetune and Test segments.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import pandas as pd

from core.config.constants import DEFAULT_Q_F, DEFAULT_Q_S
from core.exceptions import EmptyEventsError
from core.regions.geometry import nearest_rank_index

SETUP = "S"
FINETUNE = "F"
TEST = "T"
PHASES = (SETUP, FINETUNE, TEST)


@dataclass(frozen=True)
class TemporalSplit:
    """Cutoffs over the global timestamp multiset.

    S is t < t_s, F is t_s <= t < t_f, T is t >= t_f.
    """

    t_s: int
    t_f: int
    q_s: float = DEFAULT_Q_S
    q_f: float = DEFAULT_Q_F

    def phase_of(self, timestamp: int) -> str:
        if timestamp < self.t_s:
            return SETUP
        if timestamp < self.t_f:
            return FINETUNE
        return TEST

    def tag(self, timestamps: pd.Series) -> pd.Series:
        values = np.where(
            timestamps < self.t_s, SETUP, np.where(timestamps < self.t_f, FINETUNE, TEST)
        )
        return pd.Series(values, index=timestamps.index, name="phase")


def nearest_rank_quantile(values: np.ndarray, q: float) -> int:
    ordered = np.sort(np.asarray(values))
    return int(ordered[nearest_rank_index(q, len(ordered))])


def temporal_split(
    events: pd.DataFrame,
    q_s: float = DEFAULT_Q_S,
    q_f: float = DEFAULT_Q_F,
) -> Tuple[TemporalSplit, pd.DataFrame]:
    """
    Cut the timeline at two nearest-rank timestamp quantiles and tag events.

    Args:
        events: Events with a ``timestamp`` column
        q_s: Quantile of the Set-up cutoff
        q_f: Quantile of the Finetune cutoff

    Returns:
        (TemporalSplit, copy of ``events`` with a ``phase`` column)

    Raises:
        EmptyEventsError: If there are no events
    """
    if not 0.0 < q_s < q_f <= 1.0:
        raise ValueError(f"quantiles must satisfy 0 < q_s < q_f <= 1, got {q_s}, {q_f}")
    if events.empty:
        raise EmptyEventsError("cannot split an empty event stream")
    timestamps = events["timestamp"].to_numpy()
    split = TemporalSplit(
        t_s=nearest_rank_quantile(timestamps, q_s),
        t_f=nearest_rank_quantile(timestamps, q_f),
        q_s=q_s,
        q_f=q_f,
    )
    return split, tag_events(events, split)


def tag_events(events: pd.DataFrame, split: TemporalSplit) -> pd.DataFrame:
    """
    Tag events with the phase of a split whose cutoffs are already known.

    Raises:
        EmptyEventsError: If there are no events
    """
    if events.empty:
        raise EmptyEventsError("cannot split an empty event stream")
    tagged = events.copy()
    tagged["phase"] = split.tag(tagged["timestamp"])
    return tagged
