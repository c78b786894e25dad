"""
Desk-scale sequence backbone.

A window of item indices is encoded as a recency-weighted sum of item
embeddings followed by a linear projection:

    h = W_enc @ sum_j rho^(L - j) E[v_j]

and items are scored against the projected hidden state:

    logits = E @ (W_out + scale * B @ A) @ h

The routing representation is h / ||h||. Windows are left-padded with index 0;
padding contributes nothing to h and never receives probability mass.
"""
import hashlib
import logging
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np
import torch
from torch import nn

from core.config.constants import DEFAULT_DIM, RECENCY_DECAY, ZERO_HIDDEN_NORM
from core.exceptions import DimensionMismatchError, EmptyWindowError, ZeroHiddenError
from core.model.vocab import PAD_INDEX

if TYPE_CHECKING:
    from core.model.adapter import LowRankAdapter

logger = logging.getLogger(__name__)

DTYPE = torch.float64


def pad_windows(windows: Sequence[Sequence[int]], length: Optional[int] = None) -> torch.Tensor:
    """
    Left-pad index windows into an (N, L) long tensor.

    Raises:
        EmptyWindowError: If any window is empty
    """
    if any(len(window) == 0 for window in windows):
        raise EmptyWindowError("context windows must hold at least one item")
    width = length or max((len(w) for w in windows), default=1)
    out = torch.full((len(windows), width), PAD_INDEX, dtype=torch.long)
    for row, window in enumerate(windows):
        tail = list(window)[-width:]
        out[row, width - len(tail):] = torch.as_tensor(tail, dtype=torch.long)
    return out


class Backbone(nn.Module):
    """Recency-weighted embedding encoder with input and output projections."""

    def __init__(
        self,
        num_items: int,
        dim: int = DEFAULT_DIM,
        recency_decay: float = RECENCY_DECAY,
        seed: int = 0,
        item_features: Optional[np.ndarray] = None,
    ):
        """
        Args:
            num_items: Real items in the vocabulary (padding row added on top)
            dim: Hidden dimension d
            recency_decay: rho in (0, 1]
            seed: Seed for the embedding draw when no features are given
            item_features: Optional (num_items, dim) matrix used as initial E
        """
        super().__init__()
        if not 0.0 < recency_decay <= 1.0:
            raise ValueError(f"recency_decay must lie in (0, 1], got {recency_decay}")
        rows = num_items + 1
        if item_features is not None:
            features = np.asarray(item_features, dtype=np.float64)
            if features.shape != (num_items, dim):
                raise DimensionMismatchError(
                    f"item features have shape {features.shape}, expected {(num_items, dim)}"
                )
            weight = torch.zeros(rows, dim, dtype=DTYPE)
            weight[1:] = torch.from_numpy(features.copy())
        else:
            generator = torch.Generator().manual_seed(seed)
            weight = torch.randn(rows, dim, generator=generator, dtype=DTYPE) / np.sqrt(dim)
            weight[PAD_INDEX] = 0.0
        self.embeddings = nn.Parameter(weight)
        self.enc_projection = nn.Parameter(torch.eye(dim, dtype=DTYPE))
        self.out_projection = nn.Parameter(torch.eye(dim, dtype=DTYPE))
        self.recency_decay = float(recency_decay)
        self.frozen = False

    @property
    def dim(self) -> int:
        return int(self.embeddings.shape[1])

    @property
    def num_items(self) -> int:
        return int(self.embeddings.shape[0]) - 1

    def freeze(self) -> "Backbone":
        for param in self.parameters():
            param.requires_grad_(False)
        self.frozen = True
        return self

    def checksum(self) -> str:
        """sha256 over every base parameter, in registration order."""
        digest = hashlib.sha256()
        for name, param in self.named_parameters():
            digest.update(name.encode("utf-8"))
            digest.update(param.detach().cpu().numpy().tobytes())
        return digest.hexdigest()

    def _check_indices(self, windows: torch.Tensor) -> None:
        if windows.numel() and (windows.min() < 0 or windows.max() > self.num_items):
            raise IndexError(f"item index outside 0..{self.num_items}")

    def hidden(self, windows: torch.Tensor) -> torch.Tensor:
        """Unnormalised hidden states h for an (N, L) batch of padded windows."""
        self._check_indices(windows)
        length = windows.shape[1]
        exponents = torch.arange(length - 1, -1, -1, dtype=DTYPE)
        weights = torch.pow(torch.tensor(self.recency_decay, dtype=DTYPE), exponents)
        mask = (windows != PAD_INDEX).to(DTYPE)
        pooled = torch.einsum("nl,nld->nd", mask * weights, self.embeddings[windows])
        return pooled @ self.enc_projection.T

    def logits(
        self,
        windows: torch.Tensor,
        adapter: Optional["LowRankAdapter"] = None,
    ) -> torch.Tensor:
        """
        Scores over every vocabulary row; the padding column is -inf.

        Raises:
            DimensionMismatchError: If the adapter dimension differs from d
        """
        h = self.hidden(windows)
        projected = h @ self.out_projection.T
        if adapter is not None:
            if adapter.dim != self.dim:
                raise DimensionMismatchError(
                    f"adapter dimension {adapter.dim} does not match backbone {self.dim}"
                )
            projected = projected + adapter(h)
        scores = projected @ self.embeddings.T
        pad = torch.zeros_like(scores, dtype=torch.bool)
        pad[:, PAD_INDEX] = True
        return scores.masked_fill(pad, float("-inf"))

    def forward(self, windows: torch.Tensor, adapter: Optional["LowRankAdapter"] = None) -> torch.Tensor:
        return self.logits(windows, adapter)


def encode_subsequence(backbone: Backbone, window: Sequence[int]) -> np.ndarray:
    """
    Unit-norm representation of one window.

    Raises:
        EmptyWindowError: If the window is empty
        ZeroHiddenError: If ||h|| < 1e-12
    """
    return encode_windows(backbone, [window])[0]


def encode_windows(backbone: Backbone, windows: Sequence[Sequence[int]]) -> np.ndarray:
    """Batch version of ``encode_subsequence``; returns an (N, d) float64 array."""
    if len(windows) == 0:
        return np.empty((0, backbone.dim), dtype=np.float64)
    with torch.no_grad():
        h = backbone.hidden(pad_windows(windows)).numpy()
    norms = np.linalg.norm(h, axis=1)
    bad = np.flatnonzero(norms < ZERO_HIDDEN_NORM)
    if bad.size:
        raise ZeroHiddenError(f"window {int(bad[0])} encodes to a zero hidden state")
    return h / norms[:, None]


def score_items(
    backbone: Backbone,
    adapter: Optional["LowRankAdapter"],
    window: Sequence[int],
) -> np.ndarray:
    """Logits over the full vocabulary (index 0 is padding, -inf) for one window."""
    with torch.no_grad():
        return backbone.logits(pad_windows([window]), adapter)[0].numpy()
