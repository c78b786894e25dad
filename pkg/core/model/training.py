"""
Training loops for the backbone and the region adapters.

The backbone is trained once on set-up windows and then frozen. Region
adapters are trained afterwards on their own region's data only; batches are
drawn from the set-up pool with probability ``mixing_ratio`` and from the
finetune pool otherwise.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import torch
import torch.nn.functional as F

from core.config.models import TrainConfig
from core.exceptions import (
    AlreadyFrozenError,
    EmptyRegionDataError,
    FrozenViolationError,
    KExceedsVocabError,
)
from core.logger import log_info, log_warning
from core.model.adapter import AdapterRegistry, LowRankAdapter
from core.model.backbone import Backbone, pad_windows

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExampleTensors:
    """Padded context windows and their target indices."""

    contexts: torch.Tensor  # (N, L) long, left-padded
    targets: torch.Tensor  # (N,) long

    def __len__(self) -> int:
        return int(self.targets.shape[0])

    @classmethod
    def from_lists(cls, windows: Sequence[Sequence[int]], targets: Sequence[int],
                   length: Optional[int] = None) -> "ExampleTensors":
        if len(windows) != len(targets):
            raise ValueError("windows and targets differ in length")
        if not windows:
            return cls.empty(length or 1)
        return cls(pad_windows(windows, length), torch.as_tensor(list(targets), dtype=torch.long))

    @classmethod
    def empty(cls, length: int = 1) -> "ExampleTensors":
        return cls(torch.zeros((0, length), dtype=torch.long), torch.zeros(0, dtype=torch.long))

    def subset(self, rows: Sequence[int]) -> "ExampleTensors":
        index = torch.as_tensor(list(rows), dtype=torch.long)
        return ExampleTensors(self.contexts[index], self.targets[index])

    def concat(self, other: "ExampleTensors") -> "ExampleTensors":
        if len(other) == 0:
            return self
        if len(self) == 0:
            return other
        width = max(self.contexts.shape[1], other.contexts.shape[1])
        return ExampleTensors(
            torch.cat([_widen(self.contexts, width), _widen(other.contexts, width)]),
            torch.cat([self.targets, other.targets]),
        )


def _widen(contexts: torch.Tensor, width: int) -> torch.Tensor:
    missing = width - contexts.shape[1]
    if missing <= 0:
        return contexts
    return F.pad(contexts, (missing, 0), value=0)


@dataclass(frozen=True)
class TrainResult:
    epochs: int
    steps: int
    final_loss: Optional[float]  # mean loss of the last epoch, None without training
    epoch_losses: Tuple[float, ...]


def next_item_loss(
    backbone: Backbone,
    adapter: Optional[LowRankAdapter],
    contexts: torch.Tensor,
    targets: torch.Tensor,
) -> torch.Tensor:
    """Mean negative log-likelihood of the targets under softmax of the logits."""
    return F.cross_entropy(backbone.logits(contexts, adapter), targets)


def adapter_gradients(
    backbone: Backbone,
    adapter: LowRankAdapter,
    contexts: torch.Tensor,
    targets: torch.Tensor,
) -> Tuple[float, torch.Tensor, torch.Tensor]:
    """
    Loss and its gradients with respect to the adapter factors.

    Returns:
        (loss, dL/dA, dL/dB)

    Raises:
        FrozenViolationError: If any backbone parameter received a gradient
    """
    adapter.zero_grad(set_to_none=True)
    loss = next_item_loss(backbone, adapter, contexts, targets)
    loss.backward()
    assert_frozen(backbone)
    return float(loss.detach()), adapter.A.grad.clone(), adapter.B.grad.clone()


def assert_frozen(backbone: Backbone) -> None:
    for name, param in backbone.named_parameters():
        if param.grad is not None and torch.any(param.grad != 0):
            raise FrozenViolationError(f"frozen parameter {name} received a gradient")


def _epoch_order(count: int, batch_size: int, rng: np.random.Generator) -> List[np.ndarray]:
    order = rng.permutation(count)
    return [order[start:start + batch_size] for start in range(0, count, batch_size)]


def train_setup_backbone(
    backbone: Backbone,
    examples: ExampleTensors,
    config: TrainConfig,
) -> TrainResult:
    """
    Train every base parameter on set-up windows, then freeze.

    Uses AdamW with the configured learning rate and weight decay.

    Raises:
        AlreadyFrozenError: If the backbone is already frozen
    """
    if backbone.frozen:
        raise AlreadyFrozenError("set-up training needs an unfrozen backbone")
    losses: List[float] = []
    steps = 0
    if config.setup_epochs > 0 and len(examples) > 0:
        rng = np.random.default_rng(config.seed)
        optimizer = torch.optim.AdamW(
            backbone.parameters(), lr=config.learning_rate, weight_decay=config.weight_decay
        )
        for epoch in range(config.setup_epochs):
            total = 0.0
            for rows in _epoch_order(len(examples), config.batch_size, rng):
                batch = examples.subset(rows)
                optimizer.zero_grad()
                loss = next_item_loss(backbone, None, batch.contexts, batch.targets)
                loss.backward()
                if config.grad_clip > 0:
                    torch.nn.utils.clip_grad_norm_(backbone.parameters(), config.grad_clip)
                optimizer.step()
                total += float(loss.detach()) * len(rows)
                steps += 1
            losses.append(total / len(examples))
            logger.debug("setup epoch %d loss %.6f", epoch + 1, losses[-1])
        optimizer.zero_grad(set_to_none=True)
    backbone.freeze()
    final = losses[-1] if losses else None
    log_info(
        "setup_trained",
        f"Backbone trained for {len(losses)} epochs and frozen",
        additional={"final_loss": final, "steps": steps, "examples": len(examples)},
    )
    return TrainResult(epochs=len(losses), steps=steps, final_loss=final, epoch_losses=tuple(losses))


def iter_mixed_batches(
    setup_count: int,
    finetune_count: int,
    batch_size: int,
    mixing_ratio: float,
    rng: np.random.Generator,
) -> Iterator[Tuple[str, np.ndarray]]:
    """
    Yield one epoch of ``(pool, rows)`` batches.

    Each batch comes wholly from the set-up pool ("S") with probability
    ``mixing_ratio`` and from the finetune pool ("F") otherwise. A pool that
    runs out is reshuffled and drawn again; an empty pool defers to the other.
    The epoch has ceil((setup_count + finetune_count) / batch_size) batches.
    """
    counts = {"S": setup_count, "F": finetune_count}
    orders = {pool: rng.permutation(n) for pool, n in counts.items()}
    cursors = {"S": 0, "F": 0}
    total = setup_count + finetune_count
    for _ in range(-(-total // batch_size)):
        pool = "S" if rng.random() < mixing_ratio else "F"
        if counts[pool] == 0:
            pool = "F" if pool == "S" else "S"
        rows = []
        while len(rows) < batch_size:
            if cursors[pool] >= counts[pool]:
                orders[pool] = rng.permutation(counts[pool])
                cursors[pool] = 0
            take = min(batch_size - len(rows), counts[pool] - cursors[pool])
            rows.extend(orders[pool][cursors[pool]:cursors[pool] + take])
            cursors[pool] += take
        yield pool, np.asarray(rows, dtype=np.int64)


def train_region_adapter(
    backbone: Backbone,
    adapter: LowRankAdapter,
    setup_examples: ExampleTensors,
    finetune_examples: ExampleTensors,
    config: TrainConfig,
    separation_penalty: Optional[float] = None,
    arm: Optional[str] = None,
) -> TrainResult:
    """
    Train one region adapter on its set-up and finetune examples.

    Only the adapter's A and B change. The separation penalty of the current
    region set is logged every epoch; it does not enter the loss.

    Args:
        backbone: Frozen backbone
        adapter: Adapter of the region being trained
        setup_examples: The region's set-up windows
        finetune_examples: The region's finetune windows
        config: Optimisation settings
        separation_penalty: Penalty value logged alongside the loss
        arm: Arm name for the log

    Raises:
        EmptyRegionDataError: If both pools are empty; the adapter is untouched
        FrozenViolationError: If a backbone parameter received a gradient
    """
    if not backbone.frozen:
        raise FrozenViolationError("adapters train against a frozen backbone only")
    total = len(setup_examples) + len(finetune_examples)
    if total == 0:
        log_warning(
            "empty_region_data",
            f"Region {adapter.region_id} has no examples; adapter left unchanged",
            arm=arm,
            additional={"region_id": adapter.region_id},
        )
        raise EmptyRegionDataError(f"region {adapter.region_id} has no training examples")

    pools = {"S": setup_examples, "F": finetune_examples}
    rng = np.random.default_rng(config.seed + adapter.region_id)
    optimizer = torch.optim.AdamW(
        adapter.parameters(), lr=config.learning_rate, weight_decay=config.weight_decay
    )
    losses: List[float] = []
    steps = 0
    adapter.train(True)
    try:
        for epoch in range(config.finetune_epochs):
            running = 0.0
            seen = 0
            for pool, rows in iter_mixed_batches(
                len(setup_examples), len(finetune_examples),
                config.batch_size, config.mixing_ratio, rng,
            ):
                batch = pools[pool].subset(rows)
                optimizer.zero_grad()
                loss = next_item_loss(backbone, adapter, batch.contexts, batch.targets)
                loss.backward()
                assert_frozen(backbone)
                if config.grad_clip > 0:
                    torch.nn.utils.clip_grad_norm_(adapter.parameters(), config.grad_clip)
                optimizer.step()
                running += float(loss.detach()) * len(rows)
                seen += len(rows)
                steps += 1
            losses.append(running / seen)
            log_info(
                "adapter_epoch",
                f"Region {adapter.region_id} epoch {epoch + 1} loss {losses[-1]:.6f}",
                arm=arm,
                additional={
                    "region_id": adapter.region_id,
                    "epoch": epoch + 1,
                    "loss": losses[-1],
                    "separation_penalty": separation_penalty,
                },
            )
    finally:
        adapter.train(False)
        optimizer.zero_grad(set_to_none=True)
    return TrainResult(
        epochs=len(losses), steps=steps, final_loss=losses[-1] if losses else None,
        epoch_losses=tuple(losses),
    )


def train_adapters_parallel(
    backbone: Backbone,
    registry: AdapterRegistry,
    region_data: Mapping[int, Tuple[ExampleTensors, ExampleTensors]],
    config: TrainConfig,
    threads: int = 1,
    separation_penalty: Optional[float] = None,
    arm: Optional[str] = None,
) -> Dict[int, Optional[TrainResult]]:
    """
    Train every region's adapter; regions run concurrently on ``threads`` workers.

    Regions without data keep their adapter and map to None.
    """
    def _train(region_id: int) -> Optional[TrainResult]:
        setup, finetune = region_data[region_id]
        try:
            return train_region_adapter(
                backbone, registry[region_id], setup, finetune, config,
                separation_penalty=separation_penalty, arm=arm,
            )
        except EmptyRegionDataError:
            return None

    region_ids = sorted(region_data)
    if threads <= 1 or len(region_ids) <= 1:
        return {region_id: _train(region_id) for region_id in region_ids}
    with ThreadPoolExecutor(max_workers=threads) as executor:
        results = list(executor.map(_train, region_ids))
    return dict(zip(region_ids, results))


def topk_from_logits(logits: Sequence[float], k: int) -> List[int]:
    """Positions of the k largest logits, descending; lower position first on ties."""
    values = np.asarray(logits, dtype=np.float64)
    if k > values.size:
        raise KExceedsVocabError(f"k={k} exceeds the {values.size} candidates")
    order = np.argsort(-values, kind="stable")
    return [int(i) for i in order[:k]]


def predict_topk(
    backbone: Backbone,
    adapter: Optional[LowRankAdapter],
    window: Sequence[int],
    k: int,
    exclude_seen: bool = False,
) -> List[int]:
    """
    Top-k item indices for one window under the (optionally adapted) model.

    Args:
        backbone: Frozen backbone
        adapter: Routed region adapter, or None for the base model
        window: Context item indices
        k: Number of items to return
        exclude_seen: Drop the window's own items from the ranking

    Raises:
        KExceedsVocabError: If k exceeds the number of real items
    """
    if k > backbone.num_items:
        raise KExceedsVocabError(f"k={k} exceeds the {backbone.num_items} items")
    return predict_topk_batch(backbone, adapter, [window], k, exclude_seen)[0]


def predict_topk_batch(
    backbone: Backbone,
    adapter: Optional[LowRankAdapter],
    windows: Sequence[Sequence[int]],
    k: int,
    exclude_seen: bool = False,
) -> List[List[int]]:
    """Batched ``predict_topk``; padding is never returned."""
    if k > backbone.num_items:
        raise KExceedsVocabError(f"k={k} exceeds the {backbone.num_items} items")
    if not windows:
        return []
    with torch.no_grad():
        logits = backbone.logits(pad_windows(windows), adapter).numpy()
    results = []
    for row, window in zip(logits, windows):
        candidates = row[1:].copy()
        if exclude_seen:
            seen = [i - 1 for i in set(window) if i > 0]
            candidates[seen] = -np.inf
        results.append([i + 1 for i in topk_from_logits(candidates, k)])
    return results


def predictive_distribution(
    backbone: Backbone,
    adapter: Optional[LowRankAdapter],
    window: Sequence[int],
) -> np.ndarray:
    """Softmax over real items (index i - 1 holds item index i)."""
    with torch.no_grad():
        logits = backbone.logits(pad_windows([window]), adapter)[0, 1:]
        return torch.softmax(logits, dim=0).numpy()
