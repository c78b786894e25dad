"""
Spherical k-means.

Maximises sum_k sum_{e in C_k} c_k^T e subject to ||c_k|| = 1. Each restart
alternates cosine assignment with normalised-sum center updates; both steps
can only raise the objective, so it is non-decreasing per iteration. The best
restart wins, the first one on ties.
"""
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

import numpy as np

from core.config.constants import DEGENERATE_NORM, KMEANS_MAX_ITER, KMEANS_RESTARTS
from core.exceptions import KTooLargeError
from core.regions.types import as_unit_matrix


@dataclass(frozen=True)
class KMeansResult:
    centers: np.ndarray  # (K, d), unit rows
    assignments: np.ndarray  # (n,), cluster index per vector
    objective: float
    history: Tuple[float, ...]  # objective after each iteration of the winning restart


def kmeans_objective(vectors: np.ndarray, centers: np.ndarray, assignments: np.ndarray) -> float:
    """Sum of cosine similarities between each vector and its assigned center."""
    return float(np.einsum("ij,ij->", vectors, centers[assignments]))


def _distinct_indices(vectors: np.ndarray) -> np.ndarray:
    _, first = np.unique(vectors, axis=0, return_index=True)
    return np.sort(first)


def _fill_empty_clusters(
    vectors: np.ndarray,
    sims: np.ndarray,
    assignments: np.ndarray,
    k: int,
) -> Tuple[np.ndarray, List[Tuple[int, int]]]:
    """Give each empty cluster the worst-fit point of a cluster with spare members."""
    assignments = assignments.copy()
    moved: List[Tuple[int, int]] = []
    for cluster in range(k):
        counts = np.bincount(assignments, minlength=k)
        if counts[cluster] > 0:
            continue
        own_sim = sims[np.arange(len(vectors)), assignments]
        candidates = counts[assignments] >= 2
        own_sim = np.where(candidates, own_sim, np.inf)
        point = int(np.argmin(own_sim))
        assignments[point] = cluster
        moved.append((cluster, point))
    return assignments, moved


def _update_centers(
    vectors: np.ndarray,
    assignments: np.ndarray,
    previous: np.ndarray,
) -> np.ndarray:
    k, dim = previous.shape
    sums = np.zeros((k, dim), dtype=np.float64)
    np.add.at(sums, assignments, vectors)
    norms = np.linalg.norm(sums, axis=1)
    centers = previous.copy()
    ok = norms >= DEGENERATE_NORM
    centers[ok] = sums[ok] / norms[ok, None]
    return centers


def _single_run(vectors: np.ndarray, centers: np.ndarray, max_iter: int) -> KMeansResult:
    k = centers.shape[0]
    assignments = None
    history: List[float] = []
    for _ in range(max_iter):
        sims = vectors @ centers.T
        new_assignments = np.argmax(sims, axis=1)
        new_assignments, moved = _fill_empty_clusters(vectors, sims, new_assignments, k)
        for cluster, point in moved:
            centers[cluster] = vectors[point]
        centers = _update_centers(vectors, new_assignments, centers)
        history.append(kmeans_objective(vectors, centers, new_assignments))
        converged = assignments is not None and np.array_equal(new_assignments, assignments)
        assignments = new_assignments
        if converged:
            break
    return KMeansResult(
        centers=centers,
        assignments=assignments,
        objective=history[-1],
        history=tuple(history),
    )


def spherical_kmeans(
    vectors: Iterable[Sequence[float]],
    k: int,
    max_iter: int = KMEANS_MAX_ITER,
    restarts: int = KMEANS_RESTARTS,
    seed: int = 0,
) -> KMeansResult:
    """
    Cluster unit vectors into ``k`` spherical clusters.

    Args:
        vectors: Unit-norm vectors, all of one dimension
        k: Number of clusters
        max_iter: Iteration cap per restart
        restarts: Independent random initialisations
        seed: Seed for the initialisation draws

    Returns:
        KMeansResult of the restart with the highest objective

    Raises:
        EmptyInputError: If ``vectors`` is empty
        KTooLargeError: If ``k`` exceeds the number of distinct vectors
        DimensionMismatchError: On ragged input
    """
    if k < 1 or max_iter < 1 or restarts < 1:
        raise ValueError("k, max_iter and restarts must be positive")
    matrix = as_unit_matrix(vectors)
    distinct = _distinct_indices(matrix)
    if k > len(distinct):
        raise KTooLargeError(f"k={k} exceeds the {len(distinct)} distinct vectors")

    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        init = rng.choice(distinct, size=k, replace=False)
        result = _single_run(matrix, matrix[init].copy(), max_iter)
        if best is None or result.objective > best.objective:
            best = result
    return best
