"""
Pairwise region overlap: the separation penalty and a radius repair pass.

For regions i < j the overlap is d_ij = (R_i + R_j - dist(c_i, c_j))_+ and the
penalty is lambda_sep * sum d_ij^2. The penalty does not depend on adapter
weights, so it is minimised directly over the radii with centers held fixed.
"""
import logging

import numpy as np

from core.config.models import OverlapDistanceMode
from core.logger import log_info
from core.regions.types import Region, RegionSet

logger = logging.getLogger(__name__)


def center_distances(region_set: RegionSet) -> np.ndarray:
    """Pairwise center distance matrix in the configured distance mode."""
    centers = region_set.centers()
    if region_set.config.overlap_distance_mode is OverlapDistanceMode.ANGULAR:
        return np.arccos(np.clip(centers @ centers.T, -1.0, 1.0))
    diff = centers[:, None, :] - centers[None, :, :]
    return np.linalg.norm(diff, axis=-1)


def _overlaps(region_set: RegionSet, radii: np.ndarray) -> np.ndarray:
    """Upper-triangular matrix of d_ij, zero on and below the diagonal."""
    raw = radii[:, None] + radii[None, :] - center_distances(region_set)
    return np.triu(np.maximum(raw, 0.0), k=1)


def separation_penalty(region_set: RegionSet) -> float:
    """lambda_sep * sum over pairs of squared overlap. Zero for fewer than two regions."""
    if len(region_set) < 2:
        return 0.0
    overlaps = _overlaps(region_set, region_set.radii())
    return float(region_set.config.lambda_sep * np.sum(overlaps ** 2))


def repair_overlap(region_set: RegionSet, steps: int, step_size: float) -> RegionSet:
    """
    Gradient descent on the separation penalty with respect to the radii.

    Each step subtracts ``step_size * 2 * lambda_sep * sum_j d_ij`` from R_i and
    clips to [0, r_max]. A set without overlap is returned as is.

    Args:
        region_set: Current state
        steps: Number of descent steps
        step_size: Learning rate for the radii

    Returns:
        RegionSet with repaired radii; centers, counters and buffer untouched
    """
    if step_size <= 0:
        raise ValueError(f"step_size must be positive, got {step_size}")
    before = separation_penalty(region_set)
    if before == 0.0 or steps <= 0:
        return region_set

    radii = region_set.radii()
    lam = region_set.config.lambda_sep
    r_max = region_set.config.r_max
    for _ in range(steps):
        overlaps = _overlaps(region_set, radii)
        symmetric = overlaps + overlaps.T
        if not np.any(symmetric):
            break
        grad = 2.0 * lam * symmetric.sum(axis=1)
        radii = np.clip(radii - step_size * grad, 0.0, r_max)

    repaired = region_set.with_regions(
        Region(
            id=region.id,
            center=region.center,
            radius=float(radius),
            member_count=region.member_count,
            created_at_phase=region.created_at_phase,
            edit_count=region.edit_count,
        )
        for region, radius in zip(region_set.regions, radii)
    )
    after = separation_penalty(repaired)
    log_info(
        "overlap_repaired",
        f"Separation penalty {before:.6f} -> {after:.6f}",
        additional={"penalty_before": before, "penalty_after": after, "steps": steps},
    )
    return repaired
