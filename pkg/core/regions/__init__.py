"""
Preference-region geometry: construction, confidence scoring, editing,
overlap repair and snapshots.
"""
from .builder import build_regions, buffer_add, cluster_into_regions
from .geometry import (
    angular_distance,
    apply_expand,
    apply_update,
    compute_radius,
    confidence,
    decide_edit,
    normalize,
    route,
    softmax,
)
from .kmeans import KMeansResult, kmeans_objective, spherical_kmeans
from .overlap import center_distances, repair_overlap, separation_penalty
from .snapshot import load_snapshot, restore, save_snapshot, snapshot
from .store import RegionStore
from .types import (
    BufferPool,
    EditAction,
    EditDecision,
    FlushReport,
    Phase,
    Region,
    RegionSet,
    as_unit_matrix,
    as_unit_vector,
)

__all__ = [
    'BufferPool',
    'EditAction',
    'EditDecision',
    'FlushReport',
    'KMeansResult',
    'Phase',
    'Region',
    'RegionSet',
    'RegionStore',
    'angular_distance',
    'apply_expand',
    'apply_update',
    'as_unit_matrix',
    'as_unit_vector',
    'buffer_add',
    'build_regions',
    'center_distances',
    'cluster_into_regions',
    'compute_radius',
    'confidence',
    'decide_edit',
    'kmeans_objective',
    'load_snapshot',
    'normalize',
    'repair_overlap',
    'restore',
    'route',
    'save_snapshot',
    'separation_penalty',
    'snapshot',
    'softmax',
    'spherical_kmeans',
]
