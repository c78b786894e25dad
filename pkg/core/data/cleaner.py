#!/usr/bin/env python
"""
Event filtering: rating binarization and k-core pruning.
"""
import logging

import pandas as pd

from core.config.constants import DEFAULT_BINARIZE_THRESHOLD

logger = logging.getLogger(__name__)


def binarize(events: pd.DataFrame, threshold: float = DEFAULT_BINARIZE_THRESHOLD) -> pd.DataFrame:
    """
    Keep positive feedback only.

    Args:
        events (pd.DataFrame): Events with a ``rating`` column
        threshold (float): Ratings >= threshold are positive

    Returns:
        pd.DataFrame: Retained events in their original order
    """
    return events[events["rating"] >= threshold].reset_index(drop=True)


def k_core_filter(events: pd.DataFrame, k: int) -> pd.DataFrame:
    """
    Iteratively drop users and items with fewer than ``k`` interactions.

    Every event counts toward both degrees, duplicates included. Pruning
    repeats until nothing changes, so the result is the unique maximal
    subset where all users and items reach ``k``.

    Args:
        events (pd.DataFrame): Events with ``user`` and ``item`` columns
        k (int): Minimum interactions per user and per item

    Returns:
        pd.DataFrame: Surviving events in their original order
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    current = events
    rounds = 0
    while True:
        user_deg = current.groupby("user")["user"].transform("size")
        item_deg = current.groupby("item")["item"].transform("size")
        keep = (user_deg >= k) & (item_deg >= k)
        if bool(keep.all()):
            break
        current = current[keep]
        rounds += 1
    logger.debug("k-core(%d) converged after %d pruning rounds", k, rounds)
    return current.reset_index(drop=True)
