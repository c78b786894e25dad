#!/usr/bin/env python
"""
Data pipeline for interaction logs.

This module orchestrates the flow from a raw log to window examples:
1. Ingest raw events
2. Binarize ratings
3. Apply k-core filtering
4. Split the timeline into S/F/T segments
5. Build right-aligned windows per user and segment
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Union

import pandas as pd

from core.config.constants import (
    DEFAULT_BINARIZE_THRESHOLD,
    DEFAULT_K_CORE,
    DEFAULT_Q_F,
    DEFAULT_Q_S,
    DEFAULT_STRIDE,
    DEFAULT_WINDOW_LENGTH,
)
from core.config.paths import EVENTS_FILE, EXAMPLES_FILE, STATS_FILE
from core.data.cleaner import binarize, k_core_filter
from core.data.loader import InputFormat, IngestResult, ingest, save_events_tsv, save_examples_tsv
from core.data.splitter import PHASES, TemporalSplit, tag_events, temporal_split
from core.data.windows import segment_windows
from core.logger import log_info

logger = logging.getLogger(__name__)

STATS_COLUMNS = ["stage", "users", "items", "interactions", "windows"]


@dataclass(frozen=True)
class PipelineResult:
    """Everything the ingest command reports and writes."""

    events: pd.DataFrame  # k-core events tagged with their phase
    split: TemporalSplit
    examples: pd.DataFrame
    stats: pd.DataFrame
    skipped: int


def stage_stats(events: pd.DataFrame, stage: str, windows: int = 0) -> Dict[str, Union[str, int]]:
    """Users, items and interactions of one processing stage."""
    return {
        "stage": stage,
        "users": int(events["user"].nunique()) if not events.empty else 0,
        "items": int(events["item"].nunique()) if not events.empty else 0,
        "interactions": int(len(events)),
        "windows": int(windows),
    }


def process_events(
    raw: pd.DataFrame,
    binarize_threshold: float = DEFAULT_BINARIZE_THRESHOLD,
    k_core: int = DEFAULT_K_CORE,
    q_s: float = DEFAULT_Q_S,
    q_f: float = DEFAULT_Q_F,
    window_length: int = DEFAULT_WINDOW_LENGTH,
    stride: int = DEFAULT_STRIDE,
    skipped: int = 0,
    split: Optional[TemporalSplit] = None,
) -> PipelineResult:
    """
    Run binarization, k-core, split and windowing over parsed events.

    Binarization always precedes k-core filtering. A given ``split`` replaces
    the quantile cutoffs.

    Raises:
        EmptyEventsError: If nothing survives filtering
    """
    positive = binarize(raw, binarize_threshold)
    core = k_core_filter(positive, k_core)
    if split is None:
        split, tagged = temporal_split(core, q_s, q_f)
    else:
        tagged = tag_events(core, split)
    examples = segment_windows(tagged, window_length, stride)

    rows = [
        stage_stats(raw, "raw"),
        stage_stats(positive, "binarized"),
        stage_stats(core, "k_core", windows=len(examples)),
    ]
    for phase in PHASES:
        windows = int((examples["phase"] == phase).sum()) if not examples.empty else 0
        rows.append(stage_stats(tagged[tagged["phase"] == phase], phase, windows=windows))
    stats = pd.DataFrame(rows, columns=STATS_COLUMNS)

    log_info(
        "pipeline_complete",
        f"{len(core)} events and {len(examples)} windows after filtering",
        additional={"t_s": split.t_s, "t_f": split.t_f, "windows": len(examples)},
    )
    return PipelineResult(events=tagged, split=split, examples=examples, stats=stats, skipped=skipped)


def run_ingest_pipeline(
    path: Union[str, Path],
    fmt: Union[str, InputFormat],
    binarize_threshold: float = DEFAULT_BINARIZE_THRESHOLD,
    k_core: int = DEFAULT_K_CORE,
    q_s: float = DEFAULT_Q_S,
    q_f: float = DEFAULT_Q_F,
    window_length: int = DEFAULT_WINDOW_LENGTH,
    stride: int = DEFAULT_STRIDE,
) -> PipelineResult:
    """Ingest a raw log and process it end to end."""
    result: IngestResult = ingest(path, fmt)
    return process_events(
        result.events,
        binarize_threshold=binarize_threshold,
        k_core=k_core,
        q_s=q_s,
        q_f=q_f,
        window_length=window_length,
        stride=stride,
        skipped=result.skipped,
    )


def save_pipeline_outputs(result: PipelineResult, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """
    Write examples, stage statistics and the tagged events.

    Returns:
        Dict[str, Path]: Output file per kind
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stats_path = out / STATS_FILE
    result.stats.to_csv(stats_path, sep="\t", index=False, lineterminator="\n")
    return {
        "examples": save_examples_tsv(result.examples, out / EXAMPLES_FILE),
        "stats": stats_path,
        "events": save_events_tsv(result.events, out / EVENTS_FILE),
    }
