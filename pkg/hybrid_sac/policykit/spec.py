from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, ContractError

INDEPENDENT = "independent"
PER_DISCRETE_ACTION = "per_discrete_action"
BINDINGS = (INDEPENDENT, PER_DISCRETE_ACTION)


@dataclass(frozen=True)
class Bounds:
    """Affine map from (-1, 1) to [low, high] applied after tanh."""

    low: tuple[float, ...]
    high: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "low", tuple(float(v) for v in self.low))
        object.__setattr__(self, "high", tuple(float(v) for v in self.high))
        if len(self.low) != len(self.high) or any(h <= l for l, h in zip(self.low, self.high)):
            raise ConfigError(f"invalid action bounds low={self.low} high={self.high}")

    @classmethod
    def symmetric(cls, dim: int, limit: float = 1.0) -> "Bounds":
        return cls((-limit,) * dim, (limit,) * dim)

    @property
    def dim(self) -> int:
        return len(self.low)

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.high) + np.asarray(self.low)) / 2.0

    @property
    def scale(self) -> np.ndarray:
        return (np.asarray(self.high) - np.asarray(self.low)) / 2.0

    @property
    def log_jacobian(self) -> float:
        return float(np.sum(np.log(self.scale)))

    def clip(self, value: np.ndarray) -> np.ndarray:
        return np.clip(value, self.low, self.high)


@dataclass(frozen=True)
class HybridActionSpec:
    """Factored action layout: D discrete components and C continuous ones."""

    discrete: tuple[int, ...] = ()
    continuous: tuple[int, ...] = ()
    binding: str = INDEPENDENT

    def __post_init__(self) -> None:
        object.__setattr__(self, "discrete", tuple(int(k) for k in self.discrete))
        object.__setattr__(self, "continuous", tuple(int(m) for m in self.continuous))
        if any(k < 1 for k in self.discrete):
            raise ConfigError(f"discrete cardinalities must be >= 1, got {self.discrete}")
        if any(m < 1 for m in self.continuous):
            raise ConfigError(f"continuous dims must be >= 1, got {self.continuous}")
        if self.binding not in BINDINGS:
            raise ConfigError(f"unknown continuous binding '{self.binding}'", key="binding")
        if self.binding == PER_DISCRETE_ACTION and (
            len(self.discrete) != 1 or len(self.continuous) != self.discrete[0]
        ):
            raise ConfigError("per_discrete_action binding needs one discrete component with one parameter per action")

    @property
    def per_discrete(self) -> bool:
        return self.binding == PER_DISCRETE_ACTION

    @property
    def joint_cardinality(self) -> int:
        return int(np.prod(self.discrete)) if self.discrete else 1

    @property
    def continuous_dim(self) -> int:
        return int(sum(self.continuous))

    @property
    def continuous_slices(self) -> list[slice]:
        offsets = np.concatenate([[0], np.cumsum(self.continuous)]).astype(int)
        return [slice(int(a), int(b)) for a, b in zip(offsets[:-1], offsets[1:])]

    def joint_index(self, discrete: Sequence[int]) -> int:
        if not self.discrete:
            return 0
        return int(np.ravel_multi_index(tuple(int(a) for a in discrete), self.discrete))

    def unravel(self, joint: int) -> tuple[int, ...]:
        if not self.discrete:
            return ()
        return tuple(int(i) for i in np.unravel_index(int(joint), self.discrete))

    def component_columns(self, component: int) -> np.ndarray:
        """For every joint index, the value taken by one discrete component."""
        grid = np.unravel_index(np.arange(self.joint_cardinality), self.discrete)
        return np.asarray(grid[component], dtype=np.intp)

    def validate(self, action: "HybridAction") -> None:
        if len(action.discrete) != len(self.discrete):
            raise ContractError(f"expected {len(self.discrete)} discrete components, got {len(action.discrete)}")
        for a, k in zip(action.discrete, self.discrete):
            if not 0 <= int(a) < k:
                raise ContractError(f"discrete action {a} outside 0..{k - 1}")
        if len(action.continuous) != len(self.continuous):
            raise ContractError(f"expected {len(self.continuous)} continuous components, got {len(action.continuous)}")
        for vec, m in zip(action.continuous, self.continuous):
            if np.shape(vec) != (m,):
                raise ContractError(f"continuous component has shape {np.shape(vec)}, expected ({m},)")
            if not np.all(np.isfinite(vec)):
                raise ContractError("continuous component is not finite")


@dataclass(frozen=True)
class HybridAction:
    discrete: tuple[int, ...] = ()
    continuous: tuple[np.ndarray, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "discrete", tuple(int(a) for a in self.discrete))
        object.__setattr__(
            self, "continuous", tuple(np.asarray(v, dtype=np.float64).reshape(-1) for v in self.continuous)
        )

    def flat_continuous(self) -> np.ndarray:
        if not self.continuous:
            return np.zeros(0)
        return np.concatenate(self.continuous)

    @classmethod
    def from_flat(cls, spec: HybridActionSpec, discrete: Sequence[int], flat: np.ndarray) -> "HybridAction":
        return cls(tuple(discrete), tuple(np.asarray(flat)[s] for s in spec.continuous_slices))
