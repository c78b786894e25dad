"""
Hypersphere geometry and the confidence-gated edit rule.

Scores are cosine similarities between a unit vector and region centers; the
softmax of those scores is the confidence distribution. ``decide_edit`` turns
that distribution into one of Update, Expand or Add, and ``apply_update`` /
``apply_expand`` move a single region by exponential moving averages.
"""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np

from core.config.constants import DEGENERATE_NORM, DISTRIBUTION_TOL, QUANTILE_EPS
from core.config.models import EditConfig
from core.exceptions import (
    DegenerateCenterError,
    EmptyMembersError,
    EmptyRegionSetError,
    InvalidDistributionError,
)
from core.regions.types import (
    EditAction,
    EditDecision,
    Region,
    RegionSet,
    as_unit_matrix,
    as_unit_vector,
)

logger = logging.getLogger(__name__)


def normalize(values: Sequence[float]) -> np.ndarray:
    """
    Scale a vector to unit length.

    Raises:
        DegenerateCenterError: If the norm is below 1e-9
    """
    vec = np.asarray(values, dtype=np.float64)
    norm = float(np.linalg.norm(vec))
    if norm < DEGENERATE_NORM:
        raise DegenerateCenterError(f"cannot normalise a vector of norm {norm:.3e}")
    return vec / norm


def angular_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """arccos of the clamped dot product; broadcasts over leading axes."""
    dots = np.sum(np.asarray(a, dtype=np.float64) * np.asarray(b, dtype=np.float64), axis=-1)
    return np.arccos(np.clip(dots, -1.0, 1.0))


def nearest_rank_index(q: float, n: int) -> int:
    """0-based index of the nearest-rank q-quantile among n sorted values."""
    return min(max(math.ceil(q * n - QUANTILE_EPS) - 1, 0), n - 1)


def compute_radius(members: Sequence[Sequence[float]], center: Sequence[float], q: float) -> float:
    """
    Nearest-rank q-quantile of the members' angular distance to ``center``.

    Args:
        members: Unit vectors assigned to the region
        center: Region center
        q: Quantile in (0, 1]

    Returns:
        Radius in radians, in [0, pi]

    Raises:
        EmptyMembersError: If ``members`` is empty
    """
    if not 0.0 < q <= 1.0:
        raise ValueError(f"quantile must lie in (0, 1], got {q}")
    if len(members) == 0:
        raise EmptyMembersError("a region radius needs at least one member")
    center_vec = as_unit_vector(center)
    matrix = as_unit_matrix(members, dim=center_vec.shape[0])
    angles = np.sort(angular_distance(matrix, center_vec))
    return float(angles[nearest_rank_index(q, len(angles))])


def softmax(scores: Sequence[float]) -> np.ndarray:
    values = np.asarray(scores, dtype=np.float64)
    shifted = np.exp(values - np.max(values))
    return shifted / shifted.sum()


def confidence(region_set: RegionSet, v: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Score a unit vector against every region.

    Returns:
        (scores, probs): cosine similarities to each center and their softmax,
        both in region order

    Raises:
        EmptyRegionSetError: If the set has no regions
    """
    if len(region_set) == 0:
        raise EmptyRegionSetError("confidence needs at least one region")
    vec = as_unit_vector(v, dim=region_set.dim)
    scores = region_set.centers() @ vec
    return scores, softmax(scores)


def route(region_set: RegionSet, v: Sequence[float]) -> int:
    """Id of the region with the highest raw score; lowest id on ties."""
    scores, _ = confidence(region_set, v)
    return _argmax_lowest_id(scores, region_set.ids)


def _argmax_lowest_id(values: np.ndarray, region_ids: Sequence[int]) -> int:
    top = np.max(values)
    tied = [region_ids[i] for i in np.flatnonzero(values == top)]
    return int(min(tied))


def decide_edit(
    probs: Sequence[float],
    config: EditConfig,
    region_ids: Optional[Sequence[int]] = None,
) -> EditDecision:
    """
    Apply the confidence-gated edit rule.

    Update when p* >= tau and delta >= delta_min, Expand when p* >= tau and
    delta < delta_min, Add when p* < tau. With a single region delta is p*.

    Args:
        probs: Confidence distribution over regions
        config: Thresholds tau and delta_min
        region_ids: Ids aligned with ``probs``; defaults to positions

    Raises:
        InvalidDistributionError: If ``probs`` does not sum to one
    """
    values = np.asarray(probs, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise InvalidDistributionError("probabilities must be a non-empty vector")
    if np.any(values < 0) or abs(float(values.sum()) - 1.0) > DISTRIBUTION_TOL:
        raise InvalidDistributionError(f"probabilities sum to {values.sum():.9f}")
    ids = list(region_ids) if region_ids is not None else list(range(values.size))
    if len(ids) != values.size:
        raise InvalidDistributionError("region_ids and probs differ in length")

    p_star = float(values.max())
    if values.size == 1:
        delta = p_star
    else:
        second = float(np.sort(values)[-2])
        delta = p_star - second

    if p_star < config.tau:
        action, target = EditAction.ADD, None
    elif delta >= config.delta_min:
        action, target = EditAction.UPDATE, _argmax_lowest_id(values, ids)
    else:
        action, target = EditAction.EXPAND, _argmax_lowest_id(values, ids)
    return EditDecision(
        action=action,
        target_region=target,
        p_star=p_star,
        margin_delta=delta,
        probs=tuple(float(p) for p in values),
    )


def _ema_center(center: np.ndarray, v: np.ndarray, weight: float) -> np.ndarray:
    mixed = (1.0 - weight) * center + weight * v
    norm = float(np.linalg.norm(mixed))
    if norm < DEGENERATE_NORM:
        raise DegenerateCenterError(
            f"center step collapsed to norm {norm:.3e} (antipodal update with weight {weight})"
        )
    return mixed / norm


def apply_update(region: Region, v: Sequence[float], config: EditConfig) -> Region:
    """
    EMA refinement: radius moves toward the angle of ``v``, center toward ``v``.

    Raises:
        DegenerateCenterError: If the center step has near-zero norm
    """
    vec = as_unit_vector(v, dim=region.dim)
    theta = float(angular_distance(region.center, vec))
    radius = (1.0 - config.beta) * region.radius + config.beta * theta
    center = _ema_center(region.center, vec, config.gamma)
    return Region(
        id=region.id,
        center=center,
        radius=float(np.clip(radius, 0.0, config.r_max)),
        member_count=region.member_count + 1,
        created_at_phase=region.created_at_phase,
        edit_count=region.edit_count + 1,
    )


def apply_expand(region: Region, v: Sequence[float], config: EditConfig) -> Region:
    """
    Boundary growth: the radius grows by a share of the overshoot, capped at
    ``r_max``; it never shrinks.

    Raises:
        DegenerateCenterError: If the center step has near-zero norm
    """
    vec = as_unit_vector(v, dim=region.dim)
    theta = float(angular_distance(region.center, vec))
    grown = region.radius + config.lambda_expand * max(theta - region.radius, 0.0)
    radius = max(region.radius, min(grown, config.r_max))
    center = _ema_center(region.center, vec, config.alpha_expand)
    return Region(
        id=region.id,
        center=center,
        radius=radius,
        member_count=region.member_count + 1,
        created_at_phase=region.created_at_phase,
        edit_count=region.edit_count + 1,
    )
