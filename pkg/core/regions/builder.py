"""
Region construction: initial clustering and buffer-pool Add.
"""
import logging
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from core.config.constants import KMEANS_MAX_ITER, KMEANS_RESTARTS
from core.config.models import EditConfig
from core.logger import log_info
from core.regions.geometry import compute_radius
from core.regions.kmeans import KMeansResult, spherical_kmeans
from core.regions.types import (
    BufferPool,
    FlushReport,
    Phase,
    Region,
    RegionSet,
    as_unit_matrix,
    as_unit_vector,
)

logger = logging.getLogger(__name__)


def cluster_into_regions(
    matrix: np.ndarray,
    k: int,
    config: EditConfig,
    first_id: int,
    phase: Phase,
    seed: int,
    max_iter: int = KMEANS_MAX_ITER,
    restarts: int = KMEANS_RESTARTS,
) -> Tuple[List[Region], KMeansResult]:
    """
    Cluster unit vectors and turn every cluster into a region.

    Region ids are ``first_id``, ``first_id + 1``, ... in cluster order.
    Radii are the nearest-rank quantile of member angles, clipped to ``r_max``.
    """
    result = spherical_kmeans(matrix, k, max_iter=max_iter, restarts=restarts, seed=seed)
    regions = []
    for cluster in range(k):
        members = matrix[result.assignments == cluster]
        center = result.centers[cluster]
        radius = compute_radius(members, center, config.radius_quantile)
        regions.append(
            Region(
                id=first_id + cluster,
                center=center,
                radius=min(radius, config.r_max),
                member_count=int(members.shape[0]),
                created_at_phase=phase,
            )
        )
    return regions, result


def build_regions(
    vectors: Iterable[Sequence[float]],
    k: int,
    config: EditConfig,
    seed: int = 0,
    max_iter: int = KMEANS_MAX_ITER,
    restarts: int = KMEANS_RESTARTS,
) -> RegionSet:
    """
    Build the initial region set from set-up representations.

    Args:
        vectors: Unit vectors of every set-up window
        k: Number of regions
        config: Edit configuration stored with the set
        seed: k-means seed

    Returns:
        RegionSet with ids 0..k-1 and an empty buffer

    Raises:
        EmptyInputError, KTooLargeError, DimensionMismatchError: From clustering
    """
    matrix = as_unit_matrix(vectors)
    regions, result = cluster_into_regions(
        matrix, k, config, first_id=0, phase=Phase.SETUP, seed=seed,
        max_iter=max_iter, restarts=restarts,
    )
    log_info(
        "regions_built",
        f"Built {k} regions from {matrix.shape[0]} vectors",
        additional={
            "k": k,
            "objective": result.objective,
            "iterations": len(result.history),
            "radii": [round(r.radius, 6) for r in regions],
        },
    )
    return RegionSet(regions=tuple(regions), dim=matrix.shape[1], config=config)


def buffer_add(
    region_set: RegionSet,
    v: Sequence[float],
    seed: int = 0,
    max_iter: int = KMEANS_MAX_ITER,
    restarts: int = KMEANS_RESTARTS,
) -> Tuple[RegionSet, Optional[FlushReport]]:
    """
    Queue a low-confidence vector; flush into new regions at the threshold.

    When the buffer reaches ``buffer_threshold`` the pending vectors are
    clustered into ``k_add`` regions (fewer if the buffer holds fewer distinct
    vectors), the buffer is cleared and a FlushReport names the new ids.

    Args:
        region_set: Current state
        v: Unit vector to queue
        seed: Base seed; the flush clusters with ``seed + next_id``

    Returns:
        (new state, FlushReport or None)

    Raises:
        DimensionMismatchError: If ``v`` has the wrong dimension
    """
    vec = as_unit_vector(v, dim=region_set.dim)
    buffer = region_set.buffer.append(vec)
    config = region_set.config
    if buffer.size < config.buffer_threshold:
        return region_set.with_buffer(buffer), None

    pending = buffer.as_matrix(region_set.dim)
    distinct = np.unique(pending, axis=0).shape[0]
    k = min(config.k_add, distinct)
    first_id = region_set.next_id
    new_regions, result = cluster_into_regions(
        pending, k, config, first_id=first_id, phase=Phase.FINETUNE,
        seed=seed + first_id, max_iter=max_iter, restarts=restarts,
    )
    report = FlushReport(
        new_region_ids=tuple(r.id for r in new_regions),
        member_region_ids=tuple(first_id + int(a) for a in result.assignments),
        flushed=int(pending.shape[0]),
    )
    log_info(
        "buffer_flush",
        f"Flushed {report.flushed} buffered vectors into regions {list(report.new_region_ids)}",
        additional={"new_region_ids": list(report.new_region_ids), "flushed": report.flushed},
    )
    updated = region_set.with_regions(region_set.regions + tuple(new_regions))
    return updated.with_buffer(BufferPool()), report
