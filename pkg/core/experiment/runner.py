"""
Set-up, finetune and test phases for every comparison arm.

Set-up trains and freezes the backbone, encodes the set-up windows and builds
the initial regions. Finetune streams the finetune windows through the
confidence-gated editor (RAIE arm), then trains adapters per region. Test
routes each window to the region with the highest raw center score and ranks
items with that region's adapter.
"""
import logging
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from core.config.models import Arm, ExperimentConfig
from core.config.settings import resolve_threads
from core.data.splitter import FINETUNE, SETUP, TEST
from core.exceptions import DegenerateCenterError, EmptyInputError
from core.experiment.metrics import SplitMetrics
from core.experiment.reports import (
    EvalReport,
    ForgettingRow,
    build_forgetting_rows,
    region_geometry_report,
)
from core.experiment.state import (
    GLOBAL_ADAPTER_ID,
    GLOBAL_ARMS,
    REGION_ARMS,
    ArmState,
    EditLogEntry,
    EncodedExamples,
    ExperimentState,
    encode_examples,
)
from core.logger import log_info, log_warning
from core.model.adapter import AdapterRegistry
from core.model.backbone import Backbone, encode_windows
from core.model.training import (
    ExampleTensors,
    predict_topk_batch,
    train_adapters_parallel,
    train_setup_backbone,
)
from core.model.vocab import ItemVocab
from core.regions.builder import buffer_add, build_regions
from core.regions.geometry import apply_expand, apply_update, confidence, decide_edit
from core.regions.overlap import repair_overlap, separation_penalty
from core.regions.store import RegionStore
from core.regions.types import EditAction, RegionSet

logger = logging.getLogger(__name__)


def _item_feature_matrix(
    vocab: ItemVocab,
    item_features: Optional[Tuple[Sequence[str], np.ndarray]],
    dim: int,
    seed: int,
) -> Optional[np.ndarray]:
    """Align item feature rows to the vocabulary; unknown items get random unit rows."""
    if item_features is None:
        return None
    ids, matrix = item_features
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.shape[1] != dim:
        raise ValueError(f"item features have dimension {matrix.shape[1]}, config dim is {dim}")
    lookup = {str(item): row for item, row in zip(ids, matrix)}
    rng = np.random.default_rng(seed)
    rows = []
    for item in vocab.item_ids:
        if item in lookup:
            rows.append(lookup[item])
        else:
            fallback = rng.standard_normal(dim)
            rows.append(fallback / np.linalg.norm(fallback))
    return np.vstack(rows)


def route_vectors(region_set: RegionSet, vectors: np.ndarray) -> np.ndarray:
    """Region id with the highest raw score per row; lowest id on ties."""
    if vectors.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    scores = vectors @ region_set.centers().T
    ids = np.asarray(region_set.ids, dtype=np.int64)
    order = np.argsort(ids, kind="stable")
    best = np.argmax(scores[:, order], axis=1)
    return ids[order][best]


def _new_arm(arm: Arm, config: ExperimentConfig, region_set: RegionSet) -> ArmState:
    if arm in REGION_ARMS:
        registry = AdapterRegistry(config.dim, config.adapter, base_seed=config.seed)
        for region_id in region_set.ids:
            registry.create(region_id)
        return ArmState(arm=arm, registry=registry, region_set=region_set, pre_region_set=region_set)
    if arm in GLOBAL_ARMS:
        registry = AdapterRegistry(config.dim, config.adapter, base_seed=config.seed)
        registry.create(GLOBAL_ADAPTER_ID)
        return ArmState(arm=arm, registry=registry)
    return ArmState(arm=arm)


def run_setup(
    examples_s: pd.DataFrame,
    config: ExperimentConfig,
    vocab: Optional[ItemVocab] = None,
    item_features: Optional[Tuple[Sequence[str], np.ndarray]] = None,
) -> ExperimentState:
    """
    Train and freeze the backbone, then build the initial regions.

    Args:
        examples_s: Set-up window examples (user, phase, context, target)
        config: Experiment configuration
        vocab: Item vocabulary; built from ``examples_s`` when omitted
        item_features: Optional ``(item ids, matrix)`` for the initial embeddings

    Returns:
        ExperimentState with a frozen backbone, the set-up RegionSet and one
        zero-effect adapter per region in every region arm

    Raises:
        EmptyInputError: If there are no usable set-up examples
    """
    started = time.perf_counter()
    if vocab is None:
        items: List[str] = []
        for context, target in zip(examples_s["context"], examples_s["target"]):
            items.extend(context)
            items.append(target)
        vocab = ItemVocab.from_items(items)
    encoded = encode_examples(examples_s, vocab)
    if len(encoded) == 0:
        raise EmptyInputError("set-up needs at least one usable window example")
    log_info(
        "setup_start",
        f"Set-up on {len(encoded)} windows over {vocab.size} items",
        additional={"examples": len(encoded), "items": vocab.size, "k_regions": config.k_regions},
    )

    features = _item_feature_matrix(vocab, item_features, config.dim, config.seed)
    backbone = Backbone(
        vocab.size, dim=config.dim, recency_decay=config.recency_decay,
        seed=config.seed, item_features=features,
    )
    train_setup_backbone(backbone, encoded.tensors(config.window_length), config.train)

    vectors = encode_windows(backbone, encoded.windows)
    region_set = build_regions(
        vectors, config.k_regions, config.edit, seed=config.seed,
        max_iter=config.kmeans_max_iter, restarts=config.kmeans_restarts,
    )
    setup_routes = route_vectors(region_set, vectors)
    arms = {arm: _new_arm(arm, config, region_set) for arm in config.arms}

    log_info(
        "setup_complete",
        f"Set-up finished with {len(region_set)} regions",
        additional={
            "seconds": round(time.perf_counter() - started, 3),
            "region_sizes": np.bincount(setup_routes, minlength=len(region_set)).tolist(),
        },
    )
    return ExperimentState(
        config=config,
        vocab=vocab,
        backbone=backbone,
        region_set=region_set,
        setup_routes=setup_routes,
        arms=arms,
        setup_examples=encoded,
    )


def _edit_pass(
    arm_state: ArmState,
    vectors: np.ndarray,
    config: ExperimentConfig,
) -> np.ndarray:
    """
    Stream finetune vectors through the editor in order.

    Returns the region id each window trains with: the edited region for
    Update/Expand, the flush assignment for buffered windows, and the argmax
    region for windows still buffered at the end.
    """
    store = RegionStore(arm_state.region_set)
    assigned = np.full(vectors.shape[0], -1, dtype=np.int64)
    pending: List[int] = []
    log: List[EditLogEntry] = []
    counts = {action: 0 for action in EditAction}

    for window_id, v in enumerate(vectors):
        current = store.current()
        _, probs = confidence(current, v)
        decision = decide_edit(probs, config.edit, region_ids=current.ids)
        counts[decision.action] += 1
        log.append(EditLogEntry(
            window_id=window_id,
            p_star=decision.p_star,
            margin_delta=decision.margin_delta,
            action=decision.action,
            region_id=decision.target_region,
        ))
        if decision.action is EditAction.ADD:
            updated, report = buffer_add(
                current, v, seed=config.seed,
                max_iter=config.kmeans_max_iter, restarts=config.kmeans_restarts,
            )
            pending.append(window_id)
            if report is not None:
                for pending_id, region_id in zip(pending, report.member_region_ids):
                    assigned[pending_id] = region_id
                for region_id in report.new_region_ids:
                    arm_state.registry.create(region_id)
                pending = []
            store.publish(updated)
            continue

        target = decision.target_region
        assigned[window_id] = target
        edit = apply_update if decision.action is EditAction.UPDATE else apply_expand
        try:
            region = edit(current.get(target), v, config.edit)
        except DegenerateCenterError as exc:
            log_warning(
                "degenerate_edit",
                f"Rejected {decision.action.value} of region {target}: {exc}",
                arm=arm_state.arm.value,
                additional={"window_id": window_id, "region_id": target},
            )
            continue
        store.publish(current.with_region(region))

    final = store.current()
    if pending:
        assigned[pending] = route_vectors(final, vectors[pending])
    repaired = repair_overlap(final, config.repair_steps, config.repair_step_size)
    arm_state.region_set = repaired
    arm_state.edit_log = log
    log_info(
        "edit_pass_complete",
        f"{len(vectors)} finetune windows edited; {len(repaired)} regions",
        arm=arm_state.arm.value,
        additional={
            "update": counts[EditAction.UPDATE],
            "expand": counts[EditAction.EXPAND],
            "add": counts[EditAction.ADD],
            "buffered": final.buffer.size,
            "regions": len(repaired),
        },
    )
    return assigned


def _tensors(encoded: EncodedExamples, positions: Sequence[int], length: int) -> ExampleTensors:
    return encoded.subset(positions).tensors(length)


def _train_region_arm(
    state: ExperimentState,
    arm_state: ArmState,
    finetune: EncodedExamples,
    finetune_routes: np.ndarray,
    threads: int,
) -> None:
    config = state.config
    length = config.window_length
    setup = state.setup_examples
    region_data: Dict[int, Tuple[ExampleTensors, ExampleTensors]] = {}
    for region_id in arm_state.region_set.ids:
        s_rows = np.flatnonzero(state.setup_routes == region_id)
        f_rows = np.flatnonzero(finetune_routes == region_id)
        region_data[region_id] = (_tensors(setup, s_rows, length), _tensors(finetune, f_rows, length))
    train_adapters_parallel(
        state.backbone, arm_state.registry, region_data, config.train, threads=threads,
        separation_penalty=separation_penalty(arm_state.region_set), arm=arm_state.arm.value,
    )


def _train_global_arm(
    state: ExperimentState,
    arm_state: ArmState,
    finetune: EncodedExamples,
) -> None:
    config = state.config
    length = config.window_length
    setup = state.setup_examples
    if arm_state.arm is Arm.REPLAY:
        rng = np.random.default_rng(config.seed)
        size = int(round(config.replay_fraction * len(setup)))
        sample = np.sort(rng.choice(len(setup), size=size, replace=False)) if size else []
        pooled = finetune.tensors(length).concat(_tensors(setup, sample, length))
        data = {GLOBAL_ADAPTER_ID: (ExampleTensors.empty(length), pooled)}
    else:
        data = {GLOBAL_ADAPTER_ID: (setup.tensors(length), finetune.tensors(length))}
    train_adapters_parallel(
        state.backbone, arm_state.registry, data, config.train, threads=1, arm=arm_state.arm.value,
    )


def run_finetune(
    examples_f: pd.DataFrame,
    state: ExperimentState,
    threads: Optional[int] = None,
) -> ExperimentState:
    """
    Edit regions with the finetune stream, then train every arm's adapters.

    Pre-finetune S-split metrics are recorded first as the forgetting
    baseline. With no finetune windows the state only gains that baseline.

    Args:
        examples_f: Finetune window examples in stream order
        state: State produced by ``run_setup``
        threads: Worker threads for per-region adapter training

    Returns:
        The same state object, updated in place
    """
    if state.setup_examples is None:
        raise ValueError("finetune needs the set-up examples attached to the state")
    config = state.config
    workers = resolve_threads(threads if threads is not None else config.threads)
    started = time.perf_counter()

    if state.baseline is None:
        state.baseline = {}
        for arm in state.arms:
            metrics = evaluate_encoded(state.setup_examples, state, arm)
            state.baseline[arm] = {"recall": metrics.recall, "ndcg": metrics.ndcg}

    finetune = encode_examples(examples_f, state.vocab)
    vectors = encode_windows(state.backbone, finetune.windows)

    for arm, arm_state in state.arms.items():
        if arm is Arm.FROZEN_BASE:
            arm_state.finetuned = True
            continue
        if len(finetune) == 0:
            log_info("finetune_skipped", "No finetune windows; state unchanged", arm=arm.value)
            arm_state.finetuned = True
            continue
        if arm is Arm.RAIE:
            routes = _edit_pass(arm_state, vectors, config)
            _train_region_arm(state, arm_state, finetune, routes, workers)
        elif arm is Arm.RAIE_NO_EDIT:
            routes = route_vectors(arm_state.region_set, vectors)
            _train_region_arm(state, arm_state, finetune, routes, workers)
        else:
            _train_global_arm(state, arm_state, finetune)
        arm_state.finetuned = True

    log_info(
        "finetune_complete",
        f"Finetuned {len(state.arms)} arm(s) on {len(finetune)} windows",
        additional={"seconds": round(time.perf_counter() - started, 3), "windows": len(finetune)},
    )
    return state


def _adapter_for(arm_state: ArmState, region_id: Optional[int]):
    if arm_state.registry is None:
        return None
    if region_id is None:
        return arm_state.registry.get(GLOBAL_ADAPTER_ID)
    return arm_state.registry.get(region_id)


def infer_encoded(
    encoded: EncodedExamples,
    state: ExperimentState,
    arm: Arm,
    k: Optional[int] = None,
) -> List[List[int]]:
    """Top-k item indices per encoded window for one arm. Never edits state."""
    arm_state = state.arm(arm)
    k = k or state.config.eval_cutoff
    exclude = state.config.exclude_seen
    if len(encoded) == 0:
        return []
    if not arm_state.routes:
        adapter = _adapter_for(arm_state, None)
        return predict_topk_batch(state.backbone, adapter, encoded.windows, k, exclude)

    vectors = encode_windows(state.backbone, encoded.windows)
    routes = route_vectors(arm_state.region_set, vectors)
    predictions: List[Optional[List[int]]] = [None] * len(encoded)
    for region_id in np.unique(routes):
        rows = np.flatnonzero(routes == region_id)
        adapter = _adapter_for(arm_state, int(region_id))
        ranked = predict_topk_batch(
            state.backbone, adapter, [encoded.windows[i] for i in rows], k, exclude
        )
        for row, items in zip(rows, ranked):
            predictions[row] = items
    return predictions


def run_inference(
    examples: pd.DataFrame,
    state: ExperimentState,
    arm: Arm = Arm.RAIE,
    k: Optional[int] = None,
) -> List[Optional[List[str]]]:
    """
    Ranked item ids per example row; None where the row is not encodable.
    """
    encoded = encode_examples(examples, state.vocab)
    ranked = infer_encoded(encoded, state, arm, k)
    out: List[Optional[List[str]]] = [None] * len(examples)
    for row, items in zip(encoded.rows, ranked):
        out[int(row)] = state.vocab.items(items)
    return out


def evaluate_encoded(encoded: EncodedExamples, state: ExperimentState, arm: Arm) -> SplitMetrics:
    k = state.config.eval_cutoff
    rankings = infer_encoded(encoded, state, arm, k)
    return SplitMetrics.from_rankings(rankings, encoded.targets, k)


def evaluate_split(examples: pd.DataFrame, state: ExperimentState, arm: Arm) -> SplitMetrics:
    """Mean Recall@k and NDCG@k of one arm over a set of examples."""
    return evaluate_encoded(encode_examples(examples, state.vocab), state, arm)


def forgetting_report(state: ExperimentState, examples_s: Optional[pd.DataFrame] = None) -> List[ForgettingRow]:
    """
    S-split metrics before and after finetuning, per arm.

    Raises:
        MissingBaselineError: If finetune has not recorded a baseline
    """
    encoded = (
        encode_examples(examples_s, state.vocab) if examples_s is not None else state.setup_examples
    )
    after = {}
    if state.baseline:
        after = {arm: evaluate_encoded(encoded, state, arm) for arm in state.arms}
    return build_forgetting_rows(state.baseline, after)


def evaluate(
    state: ExperimentState,
    splits: Dict[str, pd.DataFrame],
    arms: Optional[Sequence[Arm]] = None,
) -> EvalReport:
    """
    Evaluate arms over named splits; adds forgetting and geometry sections
    when finetune has run.
    """
    started = time.perf_counter()
    report = EvalReport(cutoff=state.config.eval_cutoff)
    chosen = [Arm(a) for a in (arms or list(state.arms))]
    for arm in chosen:
        for split, frame in splits.items():
            report.add(arm, split, evaluate_split(frame, state, arm))
    if state.baseline:
        setup_frame = splits.get(SETUP)
        rows = forgetting_report(state, setup_frame)
        report.forgetting = [row for row in rows if row.arm in chosen]
    for arm in chosen:
        arm_state = state.arm(arm)
        if arm_state.routes and arm_state.finetuned and arm_state.pre_region_set is not None:
            report.geometry[arm] = region_geometry_report(arm_state.pre_region_set, arm_state.region_set)
    report.wall_clock_seconds = time.perf_counter() - started
    log_info(
        "evaluation_complete",
        f"Evaluated {len(chosen)} arm(s) on {', '.join(splits)}",
        additional={"seconds": round(report.wall_clock_seconds, 3)},
    )
    return report


def split_by_phase(examples: pd.DataFrame) -> Dict[str, pd.DataFrame]:
    return {
        phase: examples[examples["phase"] == phase].reset_index(drop=True)
        for phase in (SETUP, FINETUNE, TEST)
    }


@dataclass
class ExperimentOutcome:
    state: ExperimentState
    report: EvalReport


def run_experiment(
    examples: pd.DataFrame,
    config: ExperimentConfig,
    item_features: Optional[Tuple[Sequence[str], np.ndarray]] = None,
    threads: Optional[int] = None,
) -> ExperimentOutcome:
    """Set-up, finetune and evaluation on S and T for every configured arm."""
    started = time.perf_counter()
    phases = split_by_phase(examples)
    items: List[str] = []
    for context, target in zip(examples["context"], examples["target"]):
        items.extend(context)
        items.append(target)
    vocab = ItemVocab.from_items(items)
    state = run_setup(phases[SETUP], config, vocab=vocab, item_features=item_features)
    run_finetune(phases[FINETUNE], state, threads=threads)
    report = evaluate(state, {SETUP: phases[SETUP], TEST: phases[TEST]})
    report.wall_clock_seconds = time.perf_counter() - started
    return ExperimentOutcome(state=state, report=report)
