"""
Per-region low-rank adapters on the output projection.

Each adapter adds scale * B @ A to W_out, with A drawn uniformly from
[-1/sqrt(d), 1/sqrt(d)] and B zero, so a fresh adapter leaves every logit
unchanged.
"""
import hashlib
import logging
import math
from typing import Dict, Iterator, Optional, Tuple

import torch
from torch import nn

from core.config.models import AdapterConfig
from core.model.backbone import DTYPE

logger = logging.getLogger(__name__)


class LowRankAdapter(nn.Module):
    """Rank-r perturbation of a d x d weight, owned by a single region."""

    def __init__(
        self,
        region_id: int,
        dim: int,
        rank: int,
        scale: float,
        dropout_rate: float = 0.0,
        seed: int = 0,
    ):
        super().__init__()
        self.region_id = int(region_id)
        self.rank = int(rank)
        self.scale = float(scale)
        self.dropout_rate = float(dropout_rate)
        self.seed = int(seed)
        generator = torch.Generator().manual_seed(self.seed)
        bound = 1.0 / math.sqrt(dim)
        a = (torch.rand(rank, dim, generator=generator, dtype=DTYPE) * 2.0 - 1.0) * bound
        self.A = nn.Parameter(a)
        self.B = nn.Parameter(torch.zeros(dim, rank, dtype=DTYPE))
        # Dropout masks come from this adapter's own stream
        self._dropout_generator = torch.Generator().manual_seed(self.seed + 1)
        self.train(False)

    @classmethod
    def from_config(cls, region_id: int, dim: int, config: AdapterConfig, seed: int) -> "LowRankAdapter":
        return cls(
            region_id=region_id,
            dim=dim,
            rank=config.lora_rank,
            scale=config.scale,
            dropout_rate=config.lora_dropout,
            seed=seed,
        )

    @property
    def dim(self) -> int:
        return int(self.A.shape[1])

    def delta_weight(self) -> torch.Tensor:
        """Effective perturbation scale * B @ A (d x d)."""
        return self.scale * (self.B @ self.A)

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        if self.training and self.dropout_rate > 0.0:
            keep = 1.0 - self.dropout_rate
            mask = torch.rand(h.shape, generator=self._dropout_generator, dtype=DTYPE) < keep
            h = h * mask.to(DTYPE) / keep
        return self.scale * ((h @ self.A.T) @ self.B.T)

    def checksum(self) -> str:
        digest = hashlib.sha256()
        digest.update(self.A.detach().numpy().tobytes())
        digest.update(self.B.detach().numpy().tobytes())
        return digest.hexdigest()

    def delta_norm(self) -> float:
        """Frobenius norm of the effective perturbation."""
        with torch.no_grad():
            return float(torch.linalg.norm(self.delta_weight()))


class AdapterRegistry:
    """One adapter per live region; adapters never share parameters."""

    def __init__(self, dim: int, config: AdapterConfig, base_seed: int = 0):
        self.dim = dim
        self.config = config
        self.base_seed = base_seed
        self._adapters: Dict[int, LowRankAdapter] = {}

    def create(self, region_id: int) -> LowRankAdapter:
        """Fresh zero-effect adapter seeded with ``base_seed + region_id``."""
        if region_id in self._adapters:
            raise ValueError(f"region {region_id} already has an adapter")
        adapter = LowRankAdapter.from_config(
            region_id, self.dim, self.config, seed=self.base_seed + region_id
        )
        self._adapters[region_id] = adapter
        return adapter

    def ensure(self, region_id: int) -> LowRankAdapter:
        if region_id not in self._adapters:
            return self.create(region_id)
        return self._adapters[region_id]

    def add(self, adapter: LowRankAdapter) -> None:
        self._adapters[adapter.region_id] = adapter

    def get(self, region_id: int) -> Optional[LowRankAdapter]:
        return self._adapters.get(region_id)

    def __getitem__(self, region_id: int) -> LowRankAdapter:
        return self._adapters[region_id]

    def __contains__(self, region_id: int) -> bool:
        return region_id in self._adapters

    def __len__(self) -> int:
        return len(self._adapters)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._adapters))

    def items(self) -> Iterator[Tuple[int, LowRankAdapter]]:
        for region_id in sorted(self._adapters):
            yield region_id, self._adapters[region_id]

    def checksums(self) -> Dict[int, str]:
        return {region_id: adapter.checksum() for region_id, adapter in self.items()}
