"""
Backbone and adapter checkpoints.

Adapter ("RALO", version 1):
    u32 version | u64 region id | u32 r | u32 d | f64 scale | A (r x d) | B (d x r) | CRC32
Backbone ("RABB", version 1):
    u32 version | u32 rows | u32 d | f64 recency_decay | u8 frozen
    | E (rows x d) | W_enc (d x d) | W_out (d x d) | CRC32

Matrices are row-major little-endian float64.
"""
import logging
from pathlib import Path
from typing import Optional

import torch

from core.exceptions import CorruptSnapshotError
from core.logger import log_error
from core.model.adapter import LowRankAdapter
from core.model.backbone import Backbone
from core.storage.binary import BinaryReader, BinaryWriter, PathLike, write_bytes_atomic

logger = logging.getLogger(__name__)

ADAPTER_MAGIC = b"RALO"
BACKBONE_MAGIC = b"RABB"
VERSION = 1


def adapter_to_bytes(adapter: LowRankAdapter) -> bytes:
    with torch.no_grad():
        return (
            BinaryWriter(ADAPTER_MAGIC, VERSION)
            .u64(adapter.region_id)
            .u32(adapter.rank)
            .u32(adapter.dim)
            .f64(adapter.scale)
            .f64_array(adapter.A.numpy())
            .f64_array(adapter.B.numpy())
            .finish()
        )


def adapter_from_bytes(data: bytes, dropout_rate: float = 0.0, base_seed: int = 0) -> LowRankAdapter:
    """
    Rebuild an adapter; the dropout rate is not part of the checkpoint.

    The adapter is seeded with ``base_seed + region id``, as
    ``AdapterRegistry.create`` does, so its dropout stream matches a fresh one.

    Raises:
        CorruptSnapshotError: On any layout or checksum failure
    """
    reader = BinaryReader(data, ADAPTER_MAGIC, VERSION)
    region_id = reader.u64()
    rank = reader.u32()
    dim = reader.u32()
    scale = reader.f64()
    a = reader.f64_array(rank, dim)
    b = reader.f64_array(dim, rank)
    reader.expect_end()
    adapter = LowRankAdapter(region_id, dim, rank, scale, dropout_rate=dropout_rate, seed=base_seed + region_id)
    with torch.no_grad():
        adapter.A.copy_(torch.from_numpy(a))
        adapter.B.copy_(torch.from_numpy(b))
    return adapter


def backbone_to_bytes(backbone: Backbone) -> bytes:
    with torch.no_grad():
        return (
            BinaryWriter(BACKBONE_MAGIC, VERSION)
            .u32(backbone.num_items + 1)
            .u32(backbone.dim)
            .f64(backbone.recency_decay)
            .u8(1 if backbone.frozen else 0)
            .f64_array(backbone.embeddings.numpy())
            .f64_array(backbone.enc_projection.numpy())
            .f64_array(backbone.out_projection.numpy())
            .finish()
        )


def backbone_from_bytes(data: bytes) -> Backbone:
    reader = BinaryReader(data, BACKBONE_MAGIC, VERSION)
    rows = reader.u32()
    dim = reader.u32()
    recency = reader.f64()
    frozen = reader.u8()
    if rows < 1:
        raise CorruptSnapshotError("backbone has no embedding rows")
    embeddings = reader.f64_array(rows, dim)
    enc = reader.f64_array(dim, dim)
    out = reader.f64_array(dim, dim)
    reader.expect_end()
    backbone = Backbone(rows - 1, dim=dim, recency_decay=recency)
    with torch.no_grad():
        backbone.embeddings.copy_(torch.from_numpy(embeddings))
        backbone.enc_projection.copy_(torch.from_numpy(enc))
        backbone.out_projection.copy_(torch.from_numpy(out))
    if frozen:
        backbone.freeze()
    return backbone


def save_adapter(adapter: LowRankAdapter, path: PathLike) -> Path:
    return write_bytes_atomic(path, adapter_to_bytes(adapter))


def load_adapter(
    path: PathLike,
    dropout_rate: float = 0.0,
    expected_dim: Optional[int] = None,
    base_seed: int = 0,
) -> LowRankAdapter:
    try:
        adapter = adapter_from_bytes(Path(path).read_bytes(), dropout_rate=dropout_rate, base_seed=base_seed)
    except CorruptSnapshotError as exc:
        log_error("snapshot_corrupt", f"Rejected adapter checkpoint {path}", exception=exc)
        raise
    if expected_dim is not None and adapter.dim != expected_dim:
        raise CorruptSnapshotError(f"{path}: adapter dimension {adapter.dim} != {expected_dim}")
    return adapter


def save_backbone(backbone: Backbone, path: PathLike) -> Path:
    return write_bytes_atomic(path, backbone_to_bytes(backbone))


def load_backbone(path: PathLike) -> Backbone:
    try:
        return backbone_from_bytes(Path(path).read_bytes())
    except CorruptSnapshotError as exc:
        log_error("snapshot_corrupt", f"Rejected backbone checkpoint {path}", exception=exc)
        raise
