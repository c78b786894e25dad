"""
Centralized path configuration for experiment state and datasets.

This module provides a single source of truth for all file names used when
state is passed between the set-up, finetune and evaluation commands, so the
phases can run on different machines.

To change the on-disk layout, only modify the patterns below. All other
modules should use these functions to get paths.
"""
from pathlib import Path
from typing import Union

# Get the project root directory (core/config/../../)
PROJECT_ROOT = Path(__file__).parent.parent.parent

# State directory layout
CONFIG_FILE = "config.kv"
VOCAB_FILE = "vocab.tsv"
BACKBONE_FILE = "backbone.rabb"
SETUP_ROUTES_FILE = "setup_routes.tsv"
SETUP_WINDOWS_FILE = "setup_windows.tsv"
SETUP_REGIONS_FILE = "regions_setup.raie"
BASELINE_FILE = "baseline_s.kv"
ARMS_DIR = "arms"
REGIONS_FILE = "regions.raie"
REGIONS_PRE_FILE = "regions_pre.raie"
ADAPTERS_DIR = "adapters"
ADAPTER_PATTERN = "region_{region_id}.ralo"
EDIT_LOG_FILE = "edit_log.tsv"
REPORTS_DIR = "reports"

# Dataset directory layout (written by ingest and simulate)
EXAMPLES_FILE = "examples.tsv"
STATS_FILE = "stats.tsv"
EVENTS_FILE = "events.tsv"
EVENT_LABELS_FILE = "labels.tsv"
WINDOW_LABELS_FILE = "window_labels.tsv"
ITEM_VECTORS_FILE = "item_vectors.tsv"

PathLike = Union[str, Path]


def get_config_path(state_dir: PathLike) -> Path:
    """Resolved configuration stored alongside the state."""
    return Path(state_dir) / CONFIG_FILE


def get_vocab_path(state_dir: PathLike) -> Path:
    return Path(state_dir) / VOCAB_FILE


def get_backbone_path(state_dir: PathLike) -> Path:
    return Path(state_dir) / BACKBONE_FILE


def get_setup_routes_path(state_dir: PathLike) -> Path:
    return Path(state_dir) / SETUP_ROUTES_FILE


def get_baseline_path(state_dir: PathLike) -> Path:
    return Path(state_dir) / BASELINE_FILE


def get_arm_dir(state_dir: PathLike, arm: str) -> Path:
    """
    Get the directory holding one comparison arm's regions and adapters.

    Args:
        state_dir: Root of the experiment state
        arm: Arm name (e.g., 'raie')

    Returns:
        Path of the form "<state>/arms/<arm>"
    """
    return Path(state_dir) / ARMS_DIR / arm


def get_region_snapshot_path(state_dir: PathLike, arm: str, pre_edit: bool = False) -> Path:
    """
    Get the path to an arm's region snapshot.

    Args:
        state_dir: Root of the experiment state
        arm: Arm name
        pre_edit: Return the copy taken right after set-up instead of the current one

    Returns:
        Path of the form "<state>/arms/<arm>/regions.raie"
    """
    name = REGIONS_PRE_FILE if pre_edit else REGIONS_FILE
    return get_arm_dir(state_dir, arm) / name


def get_adapter_path(state_dir: PathLike, arm: str, region_id: int) -> Path:
    """
    Get the path to one region adapter checkpoint.

    Returns:
        Path of the form "<state>/arms/<arm>/adapters/region_<id>.ralo"
    """
    return get_arm_dir(state_dir, arm) / ADAPTERS_DIR / ADAPTER_PATTERN.format(region_id=region_id)


def get_adapters_dir(state_dir: PathLike, arm: str) -> Path:
    return get_arm_dir(state_dir, arm) / ADAPTERS_DIR


def get_edit_log_path(state_dir: PathLike, arm: str) -> Path:
    return get_arm_dir(state_dir, arm) / EDIT_LOG_FILE


def get_reports_dir(state_dir: PathLike) -> Path:
    return Path(state_dir) / REPORTS_DIR


def get_setup_windows_path(state_dir: PathLike) -> Path:
    """Encoded set-up windows, so finetune needs no access to the dataset."""
    return Path(state_dir) / SETUP_WINDOWS_FILE


def get_setup_regions_path(state_dir: PathLike) -> Path:
    return Path(state_dir) / SETUP_REGIONS_FILE
