"""
Region snapshot format (version 1, little-endian).

    "RAIE" | u32 version | u32 dim | u32 K
    K x ( u64 id | dim x f64 center | f64 radius | u64 member_count
          | u64 edit_count | u8 created_phase )
    u32 buffer count | count x dim x f64
    EditConfig: 8 x f64 (tau .. radius_quantile) | u32 buffer_threshold
                | u32 k_add | f64 lambda_sep | u32 overlap_distance_mode
    u32 CRC32 of everything above
"""
import logging
from pathlib import Path
from typing import Optional

from core.config.models import EditConfig, OverlapDistanceMode
from core.exceptions import CorruptSnapshotError, DimensionMismatchError
from core.logger import log_error, log_info
from core.regions.types import BufferPool, Phase, Region, RegionSet
from core.storage.binary import BinaryReader, BinaryWriter, PathLike, write_bytes_atomic

logger = logging.getLogger(__name__)

MAGIC = b"RAIE"
VERSION = 1

_CONFIG_FLOATS = (
    "tau",
    "delta_min",
    "beta",
    "gamma",
    "lambda_expand",
    "alpha_expand",
    "r_max",
    "radius_quantile",
)
_MODES = list(OverlapDistanceMode)


def snapshot(region_set: RegionSet) -> bytes:
    """Serialise a RegionSet to the version-1 byte layout."""
    writer = BinaryWriter(MAGIC, VERSION).u32(region_set.dim).u32(len(region_set))
    for region in region_set.regions:
        (
            writer.u64(region.id)
            .f64_array(region.center)
            .f64(region.radius)
            .u64(region.member_count)
            .u64(region.edit_count)
            .u8(region.created_at_phase.code)
        )
    writer.u32(region_set.buffer.size)
    for vector in region_set.buffer.pending:
        writer.f64_array(vector)

    config = region_set.config
    for name in _CONFIG_FLOATS:
        writer.f64(getattr(config, name))
    writer.u32(config.buffer_threshold).u32(config.k_add).f64(config.lambda_sep)
    writer.u32(_MODES.index(config.overlap_distance_mode))
    return writer.finish()


def restore(data: bytes, expected_dim: Optional[int] = None) -> RegionSet:
    """
    Rebuild a RegionSet from snapshot bytes.

    Args:
        data: Output of ``snapshot``
        expected_dim: Reject snapshots of another dimension when given

    Raises:
        CorruptSnapshotError: On bad magic, version, checksum or layout
        DimensionMismatchError: If the dimension differs from ``expected_dim``
    """
    reader = BinaryReader(data, MAGIC, VERSION)
    dim = reader.u32()
    if expected_dim is not None and dim != expected_dim:
        raise DimensionMismatchError(f"snapshot has dimension {dim}, expected {expected_dim}")
    count = reader.u32()

    regions = []
    for _ in range(count):
        region_id = reader.u64()
        center = reader.f64_array(dim)
        radius = reader.f64()
        member_count = reader.u64()
        edit_count = reader.u64()
        phase_code = reader.u8()
        if phase_code >= len(Phase):
            raise CorruptSnapshotError(f"unknown phase code {phase_code}")
        regions.append(
            Region(
                id=region_id,
                center=center,
                radius=radius,
                member_count=member_count,
                created_at_phase=Phase.from_code(phase_code),
                edit_count=edit_count,
            )
        )

    pending = tuple(reader.f64_array(dim) for _ in range(reader.u32()))

    values = {name: reader.f64() for name in _CONFIG_FLOATS}
    values["buffer_threshold"] = reader.u32()
    values["k_add"] = reader.u32()
    values["lambda_sep"] = reader.f64()
    mode = reader.u32()
    if mode >= len(_MODES):
        raise CorruptSnapshotError(f"unknown overlap distance mode {mode}")
    values["overlap_distance_mode"] = _MODES[mode]
    reader.expect_end()

    try:
        config = EditConfig(**values)
        return RegionSet(regions=tuple(regions), dim=dim, config=config, buffer=BufferPool(pending))
    except ValueError as exc:
        if isinstance(exc, DimensionMismatchError):
            raise
        raise CorruptSnapshotError(f"snapshot content is invalid: {exc}") from exc


def save_snapshot(region_set: RegionSet, path: PathLike) -> Path:
    target = write_bytes_atomic(path, snapshot(region_set))
    log_info(
        "snapshot_written",
        f"Wrote {len(region_set)} regions to {target}",
        additional={"path": target, "regions": len(region_set), "buffer": region_set.buffer.size},
    )
    return target


def load_snapshot(path: PathLike, expected_dim: Optional[int] = None) -> RegionSet:
    """Read a snapshot file; corrupt files are logged before the error propagates."""
    try:
        return restore(Path(path).read_bytes(), expected_dim=expected_dim)
    except CorruptSnapshotError as exc:
        log_error("snapshot_corrupt", f"Rejected region snapshot {path}", exception=exc)
        raise
