from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError


@dataclass
class ParameterSet:
    """Ordered, named float64 arrays of trainable scalars."""

    entries: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.entries = {name: np.array(arr, dtype=np.float64) for name, arr in self.entries.items()}
        for name, arr in self.entries.items():
            if not np.all(np.isfinite(arr)):
                raise ContractError(f"parameter '{name}' contains non-finite values")

    @classmethod
    def merge(cls, parts: Iterable["ParameterSet"]) -> "ParameterSet":
        """Concatenate sets whose names are already distinct."""
        merged = cls()
        for part in parts:
            for name, arr in part.items():
                merged.add(name, arr)
        return merged

    @property
    def shapes(self) -> dict[str, tuple[int, ...]]:
        return {name: arr.shape for name, arr in self.entries.items()}

    @property
    def size(self) -> int:
        return int(sum(arr.size for arr in self.entries.values()))

    def __getitem__(self, name: str) -> np.ndarray:
        return self.entries[name]

    def __setitem__(self, name: str, value) -> None:
        arr = np.array(value, dtype=np.float64)
        if name in self.entries and arr.shape != self.entries[name].shape:
            raise ContractError(f"shape mismatch for '{name}': {arr.shape} != {self.entries[name].shape}")
        self.entries[name] = arr

    def __contains__(self, name: object) -> bool:
        return name in self.entries

    def __iter__(self) -> Iterator[str]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, name: str, value) -> None:
        if name in self.entries:
            raise ContractError(f"duplicate parameter name '{name}'")
        self.entries[name] = np.array(value, dtype=np.float64)

    def items(self):
        return self.entries.items()

    def names(self) -> list[str]:
        return list(self.entries)

    def copy(self) -> "ParameterSet":
        return ParameterSet({name: arr.copy() for name, arr in self.entries.items()})

    def zeros_like(self) -> dict[str, np.ndarray]:
        return {name: np.zeros_like(arr) for name, arr in self.entries.items()}

    def subset(self, prefix: str) -> "ParameterSet":
        return ParameterSet({n[len(prefix):]: a for n, a in self.entries.items() if n.startswith(prefix)})

    def flat(self) -> np.ndarray:
        if not self.entries:
            return np.zeros(0)
        return np.concatenate([arr.ravel() for arr in self.entries.values()])

    def assign_flat(self, vector: np.ndarray) -> None:
        vector = np.asarray(vector, dtype=np.float64)
        if vector.size != self.size:
            raise ContractError(f"flat vector has {vector.size} entries, expected {self.size}")
        offset = 0
        for name, arr in self.entries.items():
            self.entries[name] = vector[offset:offset + arr.size].reshape(arr.shape).copy()
            offset += arr.size

    def is_finite(self) -> bool:
        return all(bool(np.all(np.isfinite(arr))) for arr in self.entries.values())

    def congruent(self, other: Mapping[str, np.ndarray]) -> bool:
        if set(other) != set(self.entries):
            return False
        return all(np.shape(other[n]) == arr.shape for n, arr in self.entries.items())

    def bitwise_equal(self, other: "ParameterSet") -> bool:
        if self.names() != other.names():
            return False
        return all(
            a.shape == b.shape and a.tobytes() == b.tobytes()
            for a, b in zip(self.entries.values(), other.entries.values())
        )
