"""
In-memory experiment state shared by the set-up, finetune and test phases.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from core.config.models import Arm, ExperimentConfig
from core.model.adapter import AdapterRegistry
from core.model.backbone import Backbone
from core.model.training import ExampleTensors
from core.model.vocab import ItemVocab
from core.regions.types import EditAction, RegionSet

logger = logging.getLogger(__name__)

# Arms that keep one adapter per region and route at inference
REGION_ARMS = (Arm.RAIE, Arm.RAIE_NO_EDIT)
# Arms with a single adapter stored under this id
GLOBAL_ARMS = (Arm.GLOBAL_ADAPTER, Arm.REPLAY)
GLOBAL_ADAPTER_ID = 0


@dataclass(frozen=True)
class EditLogEntry:
    window_id: int
    p_star: float
    margin_delta: float
    action: EditAction
    region_id: Optional[int]  # None for Add


@dataclass(frozen=True)
class EncodedExamples:
    """Window examples mapped onto vocabulary indices."""

    windows: List[List[int]]
    targets: List[int]
    rows: np.ndarray  # positions of the kept rows in the source frame
    dropped: int

    def __len__(self) -> int:
        return len(self.targets)

    def tensors(self, length: int) -> ExampleTensors:
        return ExampleTensors.from_lists(self.windows, self.targets, length=length)

    def subset(self, positions: Sequence[int]) -> "EncodedExamples":
        positions = list(positions)
        return EncodedExamples(
            windows=[self.windows[i] for i in positions],
            targets=[self.targets[i] for i in positions],
            rows=self.rows[positions] if positions else np.empty(0, dtype=np.int64),
            dropped=0,
        )


def encode_examples(examples: pd.DataFrame, vocab: ItemVocab) -> EncodedExamples:
    """
    Map example items to indices.

    Context items outside the vocabulary are dropped; rows whose target is
    unknown or whose context ends up empty are skipped.
    """
    windows: List[List[int]] = []
    targets: List[int] = []
    rows: List[int] = []
    for position, (context, target) in enumerate(zip(examples["context"], examples["target"])):
        if target not in vocab:
            continue
        window = [vocab.index(item) for item in context if item in vocab]
        if not window:
            continue
        windows.append(window)
        targets.append(vocab.index(target))
        rows.append(position)
    dropped = len(examples) - len(rows)
    if dropped:
        logger.debug("dropped %d examples with out-of-vocabulary items", dropped)
    return EncodedExamples(windows, targets, np.asarray(rows, dtype=np.int64), dropped)


@dataclass
class ArmState:
    """One comparison arm: its region geometry (if any) and its adapters."""

    arm: Arm
    registry: Optional[AdapterRegistry] = None
    region_set: Optional[RegionSet] = None
    pre_region_set: Optional[RegionSet] = None
    edit_log: List[EditLogEntry] = field(default_factory=list)
    finetuned: bool = False

    @property
    def routes(self) -> bool:
        return self.arm in REGION_ARMS


@dataclass
class ExperimentState:
    """Everything produced by set-up and refined by finetune."""

    config: ExperimentConfig
    vocab: ItemVocab
    backbone: Backbone
    region_set: RegionSet  # set built during set-up
    setup_routes: np.ndarray  # region id per encoded set-up example
    arms: Dict[Arm, ArmState]
    setup_examples: Optional[EncodedExamples] = None
    baseline: Optional[Dict[Arm, Dict[str, float]]] = None

    @property
    def registry(self) -> Optional[AdapterRegistry]:
        """Region adapters of the primary region arm."""
        for arm in REGION_ARMS:
            if arm in self.arms:
                return self.arms[arm].registry
        return None

    def arm(self, arm: Arm) -> ArmState:
        try:
            return self.arms[Arm(arm)]
        except KeyError:
            raise KeyError(f"arm {Arm(arm).value!r} is not part of this experiment") from None
