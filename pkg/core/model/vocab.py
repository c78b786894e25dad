"""
Item vocabulary: external item ids to contiguous indices.

Index 0 is reserved for padding; real items occupy 1..size.
"""
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Union

import pandas as pd

PAD_INDEX = 0


class ItemVocab:
    """Bijective item id <-> index mapping with a padding slot at 0."""

    def __init__(self, item_ids: Iterable[str]):
        self._ids: List[str] = []
        self._index: Dict[str, int] = {}
        for item_id in item_ids:
            key = str(item_id)
            if key in self._index:
                raise ValueError(f"duplicate item id {key!r}")
            self._ids.append(key)
            self._index[key] = len(self._ids)

    @classmethod
    def from_items(cls, item_ids: Iterable[str]) -> "ItemVocab":
        """Vocabulary over the distinct ids in first-seen order."""
        return cls(dict.fromkeys(str(i) for i in item_ids))

    @property
    def size(self) -> int:
        """Number of real items, padding excluded."""
        return len(self._ids)

    @property
    def num_rows(self) -> int:
        """Embedding rows including the padding row."""
        return len(self._ids) + 1

    @property
    def item_ids(self) -> List[str]:
        return list(self._ids)

    def __len__(self) -> int:
        return self.size

    def __contains__(self, item_id: object) -> bool:
        return str(item_id) in self._index

    def index(self, item_id: str) -> int:
        try:
            return self._index[str(item_id)]
        except KeyError:
            raise KeyError(f"unknown item id {item_id!r}") from None

    def indices(self, item_ids: Sequence[str]) -> List[int]:
        return [self.index(i) for i in item_ids]

    def item(self, index: int) -> str:
        if not 1 <= index <= self.size:
            raise IndexError(f"item index {index} outside 1..{self.size}")
        return self._ids[index - 1]

    def items(self, indices: Sequence[int]) -> List[str]:
        return [self.item(int(i)) for i in indices]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ItemVocab):
            return NotImplemented
        return self._ids == other._ids

    def save(self, path: Union[str, Path]) -> Path:
        """One ``index<TAB>item`` row per real item."""
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame({"index": range(1, self.size + 1), "item": self._ids})
        frame.to_csv(target, sep="\t", index=False)
        return target

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ItemVocab":
        frame = pd.read_csv(path, sep="\t", dtype={"index": int, "item": str}, keep_default_na=False)
        frame = frame.sort_values("index")
        expected = list(range(1, len(frame) + 1))
        if frame["index"].tolist() != expected:
            raise ValueError(f"{path}: vocabulary indices are not contiguous from 1")
        return cls(frame["item"].tolist())
