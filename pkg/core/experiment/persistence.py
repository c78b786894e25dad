"""
Save and load an ExperimentState through a state directory.

The layout is defined in ``core.config.paths``; every phase command reads the
directory written by the previous one.
"""
import logging
from pathlib import Path
from typing import List, Union

import numpy as np
import pandas as pd

from core.config.models import Arm, ExperimentConfig
from core.config.paths import (
    get_adapter_path,
    get_adapters_dir,
    get_backbone_path,
    get_baseline_path,
    get_config_path,
    get_edit_log_path,
    get_region_snapshot_path,
    get_setup_regions_path,
    get_setup_routes_path,
    get_setup_windows_path,
    get_vocab_path,
)
from core.config.utils import build_experiment_config, config_to_kv, load_kv_config
from core.exceptions import StateNotFoundError
from core.experiment.reports import metrics_from_kv, metrics_to_kv
from core.experiment.state import (
    GLOBAL_ADAPTER_ID,
    ArmState,
    EditLogEntry,
    EncodedExamples,
    ExperimentState,
)
from core.logger import log_info
from core.model.adapter import AdapterRegistry
from core.model.checkpoint import load_adapter, load_backbone, save_adapter, save_backbone
from core.model.vocab import ItemVocab
from core.regions.snapshot import load_snapshot, save_snapshot
from core.regions.types import EditAction

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

EDIT_LOG_COLUMNS = ["window_id", "p_star", "margin_delta", "action", "region_id"]
NO_REGION = "-"


def _write_tsv(frame: pd.DataFrame, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, sep="\t", index=False, lineterminator="\n")


def _join(indices) -> str:
    return ",".join(str(int(i)) for i in indices)


def save_edit_log(entries: List[EditLogEntry], path: PathLike) -> None:
    frame = pd.DataFrame(
        [
            {
                "window_id": e.window_id,
                "p_star": f"{e.p_star:.17g}",
                "margin_delta": f"{e.margin_delta:.17g}",
                "action": e.action.value,
                "region_id": NO_REGION if e.region_id is None else e.region_id,
            }
            for e in entries
        ],
        columns=EDIT_LOG_COLUMNS,
    )
    _write_tsv(frame, Path(path))


def load_edit_log(path: PathLike) -> List[EditLogEntry]:
    frame = pd.read_csv(path, sep="\t", dtype=str, keep_default_na=False)
    return [
        EditLogEntry(
            window_id=int(row.window_id),
            p_star=float(row.p_star),
            margin_delta=float(row.margin_delta),
            action=EditAction(row.action),
            region_id=None if row.region_id == NO_REGION else int(row.region_id),
        )
        for row in frame.itertuples(index=False)
    ]


def _save_setup_windows(encoded: EncodedExamples, path: Path) -> None:
    frame = pd.DataFrame({
        "row": encoded.rows,
        "context": [_join(w) for w in encoded.windows],
        "target": encoded.targets,
    })
    _write_tsv(frame, path)


def _load_setup_windows(path: Path) -> EncodedExamples:
    frame = pd.read_csv(path, sep="\t", dtype={"row": np.int64, "context": str, "target": np.int64})
    windows = [[int(i) for i in context.split(",")] for context in frame["context"]]
    return EncodedExamples(
        windows=windows,
        targets=frame["target"].astype(int).tolist(),
        rows=frame["row"].to_numpy(dtype=np.int64),
        dropped=0,
    )


def save_state(state: ExperimentState, state_dir: PathLike) -> Path:
    """
    Write every part of ``state`` under ``state_dir``.

    Returns:
        The state directory
    """
    root = Path(state_dir)
    root.mkdir(parents=True, exist_ok=True)
    get_config_path(root).write_text(config_to_kv(state.config), encoding="utf-8")
    state.vocab.save(get_vocab_path(root))
    save_backbone(state.backbone, get_backbone_path(root))
    save_snapshot(state.region_set, get_setup_regions_path(root))
    _write_tsv(pd.DataFrame({"region_id": state.setup_routes}), get_setup_routes_path(root))
    if state.setup_examples is not None:
        _save_setup_windows(state.setup_examples, get_setup_windows_path(root))
    if state.baseline:
        get_baseline_path(root).write_text(metrics_to_kv(state.baseline), encoding="utf-8")

    for arm, arm_state in state.arms.items():
        if arm_state.region_set is not None:
            save_snapshot(arm_state.region_set, get_region_snapshot_path(root, arm.value))
            save_snapshot(arm_state.pre_region_set, get_region_snapshot_path(root, arm.value, pre_edit=True))
        if arm_state.routes:
            save_edit_log(arm_state.edit_log, get_edit_log_path(root, arm.value))
        if arm_state.registry is not None:
            for region_id, adapter in arm_state.registry.items():
                save_adapter(adapter, get_adapter_path(root, arm.value, region_id))

    log_info(
        "state_saved",
        f"Saved experiment state to {root}",
        additional={"arms": [arm.value for arm in state.arms], "finetuned": bool(state.baseline)},
    )
    return root


def _require(path: Path) -> Path:
    if not path.exists():
        raise StateNotFoundError(f"missing state file {path}")
    return path


def _load_arm(root: Path, arm: Arm, config: ExperimentConfig, finetuned: bool) -> ArmState:
    arm_state = ArmState(arm=arm, finetuned=finetuned)
    if arm is Arm.FROZEN_BASE:
        return arm_state
    registry = AdapterRegistry(config.dim, config.adapter, base_seed=config.seed)
    adapters_dir = _require(get_adapters_dir(root, arm.value))
    for path in sorted(adapters_dir.glob("*.ralo")):
        registry.add(
            load_adapter(path, config.adapter.lora_dropout, expected_dim=config.dim, base_seed=registry.base_seed)
        )
    arm_state.registry = registry
    if arm_state.routes:
        arm_state.region_set = load_snapshot(
            _require(get_region_snapshot_path(root, arm.value)), expected_dim=config.dim
        )
        arm_state.pre_region_set = load_snapshot(
            _require(get_region_snapshot_path(root, arm.value, pre_edit=True)), expected_dim=config.dim
        )
        log_path = get_edit_log_path(root, arm.value)
        if log_path.exists():
            arm_state.edit_log = load_edit_log(log_path)
    elif GLOBAL_ADAPTER_ID not in registry:
        raise StateNotFoundError(f"arm {arm.value} has no adapter checkpoint")
    return arm_state


def load_state(state_dir: PathLike) -> ExperimentState:
    """
    Rebuild an ExperimentState written by ``save_state``.

    Raises:
        StateNotFoundError: If a required file is missing
        CorruptSnapshotError: If a checkpoint fails validation
        ConfigError: If the stored configuration is invalid
    """
    root = Path(state_dir)
    if not root.is_dir():
        raise StateNotFoundError(f"state directory {root} does not exist")
    config = build_experiment_config(load_kv_config(_require(get_config_path(root))))
    vocab = ItemVocab.load(_require(get_vocab_path(root)))
    backbone = load_backbone(_require(get_backbone_path(root)))
    routes = pd.read_csv(_require(get_setup_routes_path(root)), sep="\t")["region_id"]
    setup_path = get_setup_windows_path(root)
    setup_examples = _load_setup_windows(setup_path) if setup_path.exists() else None

    baseline = None
    baseline_path = get_baseline_path(root)
    if baseline_path.exists():
        baseline = metrics_from_kv(baseline_path.read_text(encoding="utf-8"))

    region_set = load_snapshot(_require(get_setup_regions_path(root)), expected_dim=config.dim)
    arms = {arm: _load_arm(root, arm, config, finetuned=baseline is not None) for arm in config.arms}
    logger.debug("loaded state from %s with arms %s", root, [a.value for a in arms])
    return ExperimentState(
        config=config,
        vocab=vocab,
        backbone=backbone,
        region_set=region_set,
        setup_routes=routes.to_numpy(dtype=np.int64),
        arms=arms,
        setup_examples=setup_examples,
        baseline=baseline,
    )
