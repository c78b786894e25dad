"""
Synthetic preference-drift streams with ground-truth interest labels.

Every interest owns a disjoint pool of items and a latent unit direction;
item feature vectors scatter around their interest's direction. Users draw an
interest from a time-dependent mixture, keep it for ``session_length``
consecutive events, and walk through the interest's pool mostly in sequence,
which gives the backbone a learnable next-item pattern.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from scipy.optimize import linear_sum_assignment

from core.config.constants import (
    DEFAULT_DIM,
    DEFAULT_Q_F,
    DEFAULT_Q_S,
    DEFAULT_STRIDE,
    DEFAULT_WINDOW_LENGTH,
)
from core.config.paths import (
    EVENT_LABELS_FILE,
    EVENTS_FILE,
    EXAMPLES_FILE,
    ITEM_VECTORS_FILE,
    WINDOW_LABELS_FILE,
)
from core.config.utils import load_kv_config
from core.data.loader import save_events_tsv, save_examples_tsv
from core.data.pipeline import PipelineResult, process_events
from core.data.splitter import FINETUNE, SETUP, TEST, TemporalSplit
from core.exceptions import ConfigError, InvalidScenarioError, LengthMismatchError
from core.logger import log_info

logger = logging.getLogger(__name__)

POSITIVE_RATING = 5.0


class DriftKind(str, Enum):
    NONE = "none"
    STEP = "step"  # switch to the finetune mixture at the S/F boundary
    RAMP = "ramp"  # interpolate from the set-up to the finetune mixture across F
    SPIKE = "spike"  # finetune mixture during F only, set-up mixture again in T


class DriftScenario(BaseModel):
    """A reproducible drift stream description."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    num_interests: int = Field(3, ge=1)
    items_per_interest: int = Field(10, ge=1)
    num_users: int = Field(60, ge=1)
    events_per_user: int = Field(40, ge=1)
    dim: int = Field(DEFAULT_DIM, ge=1)
    noise_level: float = Field(0.1, ge=0.0, le=1.0)  # chance of a random in-pool jump
    item_spread: float = Field(0.2, ge=0.0)
    session_length: int = Field(1, ge=1)
    time_stretch: int = Field(4, ge=1)
    drift: DriftKind = DriftKind.NONE
    boundary_s: float = Field(DEFAULT_Q_S, gt=0.0, lt=1.0)
    boundary_f: float = Field(DEFAULT_Q_F, gt=0.0, le=1.0)
    setup_mixture: Optional[Tuple[float, ...]] = None
    finetune_mixture: Optional[Tuple[float, ...]] = None
    test_mixture: Optional[Tuple[float, ...]] = None
    seed: int = 0

    @field_validator("setup_mixture", "finetune_mixture", "test_mixture", mode="before")
    @classmethod
    def _split_mixture(cls, value):
        if isinstance(value, str):
            value = [float(part) for part in value.split(",") if part.strip()]
        return value

    @model_validator(mode="after")
    def _check(self) -> "DriftScenario":
        if self.boundary_s >= self.boundary_f:
            raise ValueError("boundary_s must be below boundary_f")
        if self.dim < self.num_interests:
            raise ValueError(f"dim ({self.dim}) must be >= num_interests ({self.num_interests})")
        for name in ("setup_mixture", "finetune_mixture", "test_mixture"):
            mixture = getattr(self, name)
            if mixture is None:
                continue
            if len(mixture) != self.num_interests:
                raise ValueError(f"{name} needs {self.num_interests} weights, got {len(mixture)}")
            if any(w < 0 for w in mixture) or abs(sum(mixture) - 1.0) > 1e-9:
                raise ValueError(f"{name} must be non-negative and sum to 1")
        return self

    @property
    def horizon(self) -> int:
        return self.events_per_user * self.time_stretch

    @property
    def num_items(self) -> int:
        return self.num_interests * self.items_per_interest

    def phase_mixtures(self) -> Dict[str, np.ndarray]:
        uniform = np.full(self.num_interests, 1.0 / self.num_interests)
        setup = np.asarray(self.setup_mixture if self.setup_mixture else uniform)
        if self.drift is DriftKind.NONE:
            return {SETUP: setup, FINETUNE: setup, TEST: setup}
        finetune = np.asarray(self.finetune_mixture if self.finetune_mixture else setup)
        default_test = setup if self.drift is DriftKind.SPIKE else finetune
        test = np.asarray(self.test_mixture if self.test_mixture else default_test)
        return {SETUP: setup, FINETUNE: finetune, TEST: test}

    def phase_of_time(self, t: int) -> str:
        fraction = t / self.horizon
        if fraction < self.boundary_s:
            return SETUP
        if fraction < self.boundary_f:
            return FINETUNE
        return TEST

    def _first_time_at(self, boundary: float) -> int:
        """Smallest integer time whose horizon fraction reaches ``boundary``."""
        t = math.ceil(boundary * self.horizon)
        while t > 0 and (t - 1) / self.horizon >= boundary:
            t -= 1
        while t / self.horizon < boundary:
            t += 1
        return t

    def phase_split(self) -> TemporalSplit:
        """Cutoffs that tag every time exactly as ``phase_of_time`` does."""
        return TemporalSplit(
            t_s=self._first_time_at(self.boundary_s),
            t_f=self._first_time_at(self.boundary_f),
            q_s=self.boundary_s,
            q_f=self.boundary_f,
        )

    def mixture_at(self, t: int) -> np.ndarray:
        """Interest mixture in force at time ``t``; always sums to one."""
        mixtures = self.phase_mixtures()
        phase = self.phase_of_time(t)
        if self.drift is DriftKind.RAMP and phase == FINETUNE:
            span = (self.boundary_f - self.boundary_s) * self.horizon
            progress = min(max((t - self.boundary_s * self.horizon) / span, 0.0), 1.0)
            mixed = (1.0 - progress) * mixtures[SETUP] + progress * mixtures[FINETUNE]
            return mixed / mixed.sum()
        return mixtures[phase]


@dataclass(frozen=True)
class SimulatedStream:
    events: pd.DataFrame  # user, item, rating, timestamp in (timestamp, user) order
    labels: np.ndarray  # interest per event row
    item_vectors: np.ndarray  # (num_items, dim), unit rows, row i = item "i<i>"
    item_labels: Dict[str, int]
    interest_directions: np.ndarray  # (num_interests, dim)
    scenario: DriftScenario


def item_id(index: int) -> str:
    return f"i{index}"


def user_id(index: int) -> str:
    return f"u{index}"


def interest_directions(scenario: DriftScenario, rng: np.random.Generator) -> np.ndarray:
    """Mutually orthogonal unit directions, one row per interest."""
    gaussian = rng.standard_normal((scenario.dim, scenario.num_interests))
    q, _ = np.linalg.qr(gaussian)
    return q.T.copy()


def item_feature_vectors(
    scenario: DriftScenario,
    directions: np.ndarray,
    rng: np.random.Generator,
) -> np.ndarray:
    pools = np.repeat(directions, scenario.items_per_interest, axis=0)
    noisy = pools + scenario.item_spread * rng.standard_normal(pools.shape) / np.sqrt(scenario.dim)
    return noisy / np.linalg.norm(noisy, axis=1, keepdims=True)


def generate_stream(scenario: DriftScenario) -> SimulatedStream:
    """
    Generate events and their interest labels.

    Raises:
        InvalidScenarioError: If the scenario cannot produce a stream
    """
    try:
        scenario = DriftScenario.model_validate(scenario.model_dump())
    except ValidationError as exc:
        raise InvalidScenarioError(str(exc)) from exc
    rng = np.random.default_rng(scenario.seed)
    directions = interest_directions(scenario, rng)
    vectors = item_feature_vectors(scenario, directions, rng)
    pool = scenario.items_per_interest

    users, items, stamps, labels = [], [], [], []
    for u in range(scenario.num_users):
        times = np.sort(rng.choice(scenario.horizon, size=scenario.events_per_user, replace=False))
        interest, position, remaining, phase = -1, -1, 0, None
        for t in times:
            t = int(t)
            current_phase = scenario.phase_of_time(t)
            if remaining == 0 or current_phase != phase:
                mixture = scenario.mixture_at(t)
                new_interest = int(rng.choice(scenario.num_interests, p=mixture))
                if new_interest != interest:
                    position = -1
                interest, remaining, phase = new_interest, scenario.session_length, current_phase
            if position < 0 or rng.random() < scenario.noise_level:
                position = int(rng.integers(pool))
            else:
                position = (position + 1) % pool
            remaining -= 1
            users.append(user_id(u))
            items.append(item_id(interest * pool + position))
            stamps.append(t)
            labels.append(interest)

    events = pd.DataFrame({
        "user": users,
        "item": items,
        "rating": POSITIVE_RATING,
        "timestamp": np.asarray(stamps, dtype=np.int64),
    })
    events["_label"] = labels
    events["_uid"] = [int(u[1:]) for u in users]
    events = events.sort_values(["timestamp", "_uid"], kind="mergesort").reset_index(drop=True)
    label_array = events.pop("_label").to_numpy(dtype=np.int64)
    events = events.drop(columns="_uid")

    item_labels = {item_id(i): i // pool for i in range(scenario.num_items)}
    log_info(
        "stream_generated",
        f"Generated {len(events)} events for {scenario.num_users} users",
        additional={"drift": scenario.drift.value, "interests": scenario.num_interests, "seed": scenario.seed},
    )
    return SimulatedStream(
        events=events,
        labels=label_array,
        item_vectors=vectors,
        item_labels=item_labels,
        interest_directions=directions,
        scenario=scenario,
    )


def window_label(context: Sequence[str], item_labels: Mapping[str, int]) -> int:
    """Majority interest of the context items; ties go to the most recent item's interest."""
    votes = [item_labels[item] for item in context]
    counts = np.bincount(votes)
    best = counts.max()
    if counts[votes[-1]] == best:
        return votes[-1]
    return int(np.flatnonzero(counts == best)[0])


def window_labels(examples: pd.DataFrame, item_labels: Mapping[str, int]) -> np.ndarray:
    return np.asarray(
        [window_label(context, item_labels) for context in examples["context"]], dtype=np.int64
    )


def routing_accuracy(assignments: Sequence[int], ground_truth: Sequence[int]) -> float:
    """
    Agreement between region ids and interest labels under the best one-to-one
    renaming of regions to labels.

    Raises:
        LengthMismatchError: If the sequences differ in length
    """
    if len(assignments) != len(ground_truth):
        raise LengthMismatchError(
            f"{len(assignments)} assignments vs {len(ground_truth)} labels"
        )
    if len(assignments) == 0:
        return 0.0
    regions, region_idx = np.unique(np.asarray(assignments), return_inverse=True)
    labels, label_idx = np.unique(np.asarray(ground_truth), return_inverse=True)
    contingency = np.zeros((regions.size, labels.size), dtype=np.int64)
    np.add.at(contingency, (region_idx, label_idx), 1)
    rows, cols = linear_sum_assignment(contingency, maximize=True)
    return float(contingency[rows, cols].sum() / len(assignments))


def step_scenario(**overrides) -> DriftScenario:
    """Two-interest hard switch: everything on interest 0 in S, on interest 1 afterwards."""
    values = dict(
        num_interests=2,
        drift=DriftKind.STEP,
        setup_mixture=(1.0, 0.0),
        finetune_mixture=(0.0, 1.0),
    )
    values.update(overrides)
    return DriftScenario(**values)


def new_interest_scenario(setup_interests: int = 3, **overrides) -> DriftScenario:
    """Set-up interests share S; F and T belong to one extra orthogonal interest."""
    total = setup_interests + 1
    setup = tuple([1.0 / setup_interests] * setup_interests + [0.0])
    fresh = tuple([0.0] * setup_interests + [1.0])
    values = dict(
        num_interests=total,
        drift=DriftKind.STEP,
        setup_mixture=setup,
        finetune_mixture=fresh,
    )
    values.update(overrides)
    return DriftScenario(**values)


PRESETS = {
    "none": lambda **kw: DriftScenario(**kw),
    "step": step_scenario,
    "new_interest": new_interest_scenario,
}


def load_scenario(path: Union[str, Path], seed: Optional[int] = None) -> DriftScenario:
    """
    Read a ``key = value`` scenario file.

    An optional ``preset`` key (none, step, new_interest) supplies defaults
    that the other keys override.

    Raises:
        ConfigError: On unknown keys or invalid values
    """
    values: Dict[str, object] = dict(load_kv_config(path))
    preset = str(values.pop("preset", "none"))
    if preset not in PRESETS:
        raise ConfigError(f"unknown scenario preset {preset!r}")
    if seed is not None:
        values["seed"] = seed
    try:
        return PRESETS[preset](**values)
    except (ValidationError, TypeError) as exc:
        raise ConfigError(f"invalid scenario {path}: {exc}") from exc


def write_simulation(
    stream: SimulatedStream,
    examples: pd.DataFrame,
    out_dir: Union[str, Path],
) -> Dict[str, Path]:
    """
    Write the stream in generic TSV form plus its parallel label files.

    Returns:
        Output path per kind
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "events": save_events_tsv(stream.events, out / EVENTS_FILE),
        "examples": save_examples_tsv(examples, out / EXAMPLES_FILE),
    }
    labels_path = out / EVENT_LABELS_FILE
    pd.DataFrame({"label": stream.labels}).to_csv(labels_path, sep="\t", index=False, lineterminator="\n")
    paths["labels"] = labels_path

    window_path = out / WINDOW_LABELS_FILE
    pd.DataFrame({"label": window_labels(examples, stream.item_labels)}).to_csv(
        window_path, sep="\t", index=False, lineterminator="\n"
    )
    paths["window_labels"] = window_path

    vector_path = out / ITEM_VECTORS_FILE
    frame = pd.DataFrame(stream.item_vectors, columns=[f"v{j}" for j in range(stream.item_vectors.shape[1])])
    frame.insert(0, "item", [item_id(i) for i in range(stream.item_vectors.shape[0])])
    frame.to_csv(vector_path, sep="\t", index=False, float_format="%.17g", lineterminator="\n")
    paths["item_vectors"] = vector_path
    return paths


def load_item_vectors(path: Union[str, Path]) -> Tuple[Tuple[str, ...], np.ndarray]:
    """Read ``item v0 v1 ...`` rows written by ``write_simulation``."""
    frame = pd.read_csv(path, sep="\t", dtype={"item": str})
    return tuple(frame["item"]), frame.drop(columns="item").to_numpy(dtype=np.float64)


def load_window_labels(path: Union[str, Path]) -> np.ndarray:
    return pd.read_csv(path, sep="\t")["label"].to_numpy(dtype=np.int64)


def stream_examples(
    stream: SimulatedStream,
    window_length: int = DEFAULT_WINDOW_LENGTH,
    stride: int = DEFAULT_STRIDE,
    k_core: int = 1,
) -> PipelineResult:
    """
    Run a simulated stream through the ingest pipeline.

    Events are tagged with the scenario's own phase cutoffs, so a window
    never lands in a phase whose mixture did not generate it. Simulated
    ratings are all positive, so binarization keeps every event.

    Returns:
        PipelineResult whose examples line up with ``window_labels``
    """
    return process_events(
        stream.events,
        k_core=k_core,
        q_s=stream.scenario.boundary_s,
        q_f=stream.scenario.boundary_f,
        window_length=window_length,
        stride=stride,
        split=stream.scenario.phase_split(),
    )
