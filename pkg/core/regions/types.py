"""
Domain types of the preference-region geometry.

Regions live on the unit hypersphere: each has a unit center and an angular
radius. All types here are immutable; edits produce new objects so a published
RegionSet can be read concurrently while a single writer prepares the next one.
"""
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from core.config.constants import UNIT_NORM_TOL
from core.config.models import EditConfig
from core.exceptions import (
    DimensionMismatchError,
    EmptyInputError,
    NotUnitNormError,
)


class Phase(str, Enum):
    """Phase in which a region was created. Order fixes the snapshot code."""

    SETUP = "setup"
    FINETUNE = "finetune"

    @property
    def code(self) -> int:
        return list(Phase).index(self)

    @classmethod
    def from_code(cls, code: int) -> "Phase":
        return list(cls)[code]


class EditAction(str, Enum):
    UPDATE = "update"
    EXPAND = "expand"
    ADD = "add"


def _frozen_vector(values: np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    arr.flags.writeable = False
    return arr


def as_unit_vector(values: Sequence[float], dim: Optional[int] = None) -> np.ndarray:
    """
    Validate a single unit vector.

    Raises:
        DimensionMismatchError: If the vector is not 1-D or has the wrong length
        NotUnitNormError: If the l2 norm differs from 1 by more than 1e-6
    """
    vec = np.asarray(values, dtype=np.float64)
    if vec.ndim != 1:
        raise DimensionMismatchError(f"expected a 1-D vector, got shape {vec.shape}")
    if dim is not None and vec.shape[0] != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {vec.shape[0]}")
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) > UNIT_NORM_TOL:
        raise NotUnitNormError(f"vector norm {norm:.9f} is not 1")
    return vec


def as_unit_matrix(vectors: Iterable[Sequence[float]], dim: Optional[int] = None) -> np.ndarray:
    """
    Stack unit vectors into an (n, d) float64 matrix.

    Raises:
        EmptyInputError: If no vectors are given
        DimensionMismatchError: On ragged input or a dimension other than ``dim``
        NotUnitNormError: If any row is not unit-norm
    """
    if isinstance(vectors, np.ndarray):
        rows = vectors
    else:
        rows = list(vectors)
    if len(rows) == 0:
        raise EmptyInputError("no vectors given")
    try:
        matrix = np.asarray(rows, dtype=np.float64)
    except ValueError as exc:
        raise DimensionMismatchError("vectors have differing dimensions") from exc
    if matrix.ndim != 2:
        raise DimensionMismatchError(f"expected a stack of vectors, got shape {matrix.shape}")
    if dim is not None and matrix.shape[1] != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {matrix.shape[1]}")
    norms = np.linalg.norm(matrix, axis=1)
    bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_NORM_TOL)
    if bad.size:
        raise NotUnitNormError(f"vector {int(bad[0])} has norm {norms[bad[0]]:.9f}")
    return matrix


@dataclass(frozen=True, eq=False)
class Region:
    """One editable preference region: center c_k and angular radius R_k."""

    id: int
    center: np.ndarray
    radius: float
    member_count: int = 0
    created_at_phase: Phase = Phase.SETUP
    edit_count: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", _frozen_vector(self.center))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return int(self.center.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Region):
            return NotImplemented
        return (
            self.id == other.id
            and np.array_equal(self.center, other.center)
            and self.radius == other.radius
            and self.member_count == other.member_count
            and self.created_at_phase == other.created_at_phase
            and self.edit_count == other.edit_count
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class BufferPool:
    """Arrival-ordered unit vectors waiting for a batch Add."""

    pending: Tuple[np.ndarray, ...] = ()

    @property
    def size(self) -> int:
        return len(self.pending)

    def append(self, vector: np.ndarray) -> "BufferPool":
        return BufferPool(self.pending + (_frozen_vector(vector),))

    def as_matrix(self, dim: int) -> np.ndarray:
        if not self.pending:
            return np.empty((0, dim), dtype=np.float64)
        return np.vstack(self.pending)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BufferPool):
            return NotImplemented
        return len(self.pending) == len(other.pending) and all(
            np.array_equal(a, b) for a, b in zip(self.pending, other.pending)
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class RegionSet:
    """The full region state: ordered regions, dimension, edit config, buffer."""

    regions: Tuple[Region, ...]
    dim: int
    config: EditConfig
    buffer: BufferPool = field(default_factory=BufferPool)

    def __post_init__(self) -> None:
        object.__setattr__(self, "regions", tuple(self.regions))
        ids = [region.id for region in self.regions]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate region ids: {ids}")
        for region in self.regions:
            if region.dim != self.dim:
                raise DimensionMismatchError(
                    f"region {region.id} has dimension {region.dim}, expected {self.dim}"
                )
        for vector in self.buffer.pending:
            if vector.shape[0] != self.dim:
                raise DimensionMismatchError("buffered vector has the wrong dimension")

    def __len__(self) -> int:
        return len(self.regions)

    @property
    def ids(self) -> Tuple[int, ...]:
        return tuple(region.id for region in self.regions)

    @property
    def next_id(self) -> int:
        return max(self.ids, default=-1) + 1

    def centers(self) -> np.ndarray:
        if not self.regions:
            return np.empty((0, self.dim), dtype=np.float64)
        return np.vstack([region.center for region in self.regions])

    def radii(self) -> np.ndarray:
        return np.array([region.radius for region in self.regions], dtype=np.float64)

    def index_of(self, region_id: int) -> int:
        for index, region in enumerate(self.regions):
            if region.id == region_id:
                return index
        raise KeyError(f"no region with id {region_id}")

    def get(self, region_id: int) -> Region:
        return self.regions[self.index_of(region_id)]

    def with_region(self, region: Region) -> "RegionSet":
        """Replace the region sharing ``region.id``."""
        index = self.index_of(region.id)
        regions = self.regions[:index] + (region,) + self.regions[index + 1:]
        return replace(self, regions=regions)

    def with_regions(self, regions: Iterable[Region]) -> "RegionSet":
        return replace(self, regions=tuple(regions))

    def with_buffer(self, buffer: BufferPool) -> "RegionSet":
        return replace(self, buffer=buffer)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RegionSet):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.config == other.config
            and self.regions == other.regions
            and self.buffer == other.buffer
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class EditDecision:
    """Outcome of the confidence-gated edit rule for one vector."""

    action: EditAction
    target_region: Optional[int]
    p_star: float
    margin_delta: float
    probs: Tuple[float, ...]


@dataclass(frozen=True)
class FlushReport:
    """Regions created by one buffer flush."""

    new_region_ids: Tuple[int, ...]
    member_region_ids: Tuple[int, ...]  # one per flushed vector, arrival order
    flushed: int
