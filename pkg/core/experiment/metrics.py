"""Ranking metrics for a single relevant item."""
import math
from dataclasses import dataclass
from typing import Sequence


def _rank(ranked: Sequence, target, k: int) -> int:
    """1-based rank of ``target`` within the top ``k``, or 0 when absent."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    for position, item in enumerate(ranked[:k], start=1):
        if item == target:
            return position
    return 0


def recall_at_k(ranked: Sequence, target, k: int) -> int:
    return 1 if _rank(ranked, target, k) else 0


def ndcg_at_k(ranked: Sequence, target, k: int) -> float:
    rank = _rank(ranked, target, k)
    return 1.0 / math.log2(rank + 1) if rank else 0.0


@dataclass(frozen=True)
class SplitMetrics:
    recall: float
    ndcg: float
    count: int

    @classmethod
    def from_rankings(cls, rankings: Sequence[Sequence], targets: Sequence, k: int) -> "SplitMetrics":
        if len(rankings) != len(targets):
            raise ValueError("rankings and targets differ in length")
        if not targets:
            return cls(recall=0.0, ndcg=0.0, count=0)
        recall = sum(recall_at_k(r, t, k) for r, t in zip(rankings, targets)) / len(targets)
        ndcg = sum(ndcg_at_k(r, t, k) for r, t in zip(rankings, targets)) / len(targets)
        return cls(recall=recall, ndcg=ndcg, count=len(targets))
