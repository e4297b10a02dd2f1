"""Environment contract shared by the desk-scale tasks.

``reset``/``step`` follow the familiar gym shape. Subclasses implement
``_reset`` and ``_step``; the base class enforces the declared observation
layout, reward range and episode length, and raises
:class:`~hybrid_sac.errors.EnvironmentFault` when a subclass breaks them.
"""
from __future__ import annotations

import abc
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import ContractError, EnvironmentFault
from ..numgrad.rng import make_rng
from ..policykit.spec import Bounds, HybridAction, HybridActionSpec

_REWARD_SLACK = 1e-9


@dataclass(frozen=True)
class EnvSpec:
    name: str
    observation_dim: int
    action_spec: HybridActionSpec
    bounds: tuple[Bounds, ...]
    max_episode_steps: int
    reward_range: tuple[float, float]
    observation_limit: float = 1.0

    def __post_init__(self) -> None:
        if len(self.bounds) != len(self.action_spec.continuous):
            raise ContractError(f"{self.name}: one Bounds per continuous component is required")
        for b, m in zip(self.bounds, self.action_spec.continuous):
            if b.dim != m:
                raise ContractError(f"{self.name}: bounds of dim {b.dim} for a component of dim {m}")


@dataclass(frozen=True)
class StepResult:
    observation: np.ndarray
    reward: float
    done: bool
    truncated: bool = False
    info: dict[str, Any] = field(default_factory=dict)


class Env(abc.ABC):
    spec: EnvSpec

    def __init__(self, seed: int = 0) -> None:
        self._seed = int(seed)
        self._rng = make_rng(self._seed, "env", self.spec.name)
        self._steps = 0
        self._finished = True

    @property
    def elapsed_steps(self) -> int:
        return self._steps

    @abc.abstractmethod
    def _reset(self, options: dict[str, Any]) -> np.ndarray:
        raise NotImplementedError

    @abc.abstractmethod
    def _step(self, action: HybridAction) -> tuple[np.ndarray, float, bool, dict[str, Any]]:
        raise NotImplementedError

    def reset(self, seed: int | None = None, options: dict[str, Any] | None = None) -> np.ndarray:
        if seed is not None:
            self._seed = int(seed)
            self._rng = make_rng(self._seed, "env", self.spec.name)
        self._steps = 0
        self._finished = False
        return self._checked_observation(self._reset(dict(options or {})))

    def step(self, action: HybridAction) -> StepResult:
        if self._finished:
            raise EnvironmentFault(f"{self.spec.name}: step called on a finished episode; call reset first")
        try:
            self.spec.action_spec.validate(action)
        except ContractError as exc:
            raise EnvironmentFault(f"{self.spec.name}: {exc}") from exc
        self._steps += 1
        obs, reward, terminated, info = self._step(action)
        obs = self._checked_observation(obs)
        low, high = self.spec.reward_range
        if not np.isfinite(reward) or not low - _REWARD_SLACK <= reward <= high + _REWARD_SLACK:
            raise EnvironmentFault(f"{self.spec.name}: reward {reward} outside {self.spec.reward_range}")
        truncated = not terminated and self._steps >= self.spec.max_episode_steps
        self._finished = terminated or truncated
        return StepResult(obs, float(reward), bool(terminated), bool(truncated), info)

    def sample_action(self, rng: np.random.Generator) -> HybridAction:
        """Uniform draw over discrete choices and continuous bounds."""
        discrete = tuple(int(rng.integers(k)) for k in self.spec.action_spec.discrete)
        continuous = tuple(rng.uniform(b.low, b.high) for b in self.spec.bounds)
        return HybridAction(discrete, continuous)

    def _checked_observation(self, obs: np.ndarray) -> np.ndarray:
        obs = np.asarray(obs, dtype=np.float64)
        if obs.shape != (self.spec.observation_dim,):
            raise EnvironmentFault(f"{self.spec.name}: observation shape {obs.shape}, declared ({self.spec.observation_dim},)")
        limit = self.spec.observation_limit + 1e-9
        if not np.all(np.isfinite(obs)) or np.any(np.abs(obs) > limit):
            raise EnvironmentFault(f"{self.spec.name}: observation {obs} outside the declared bounds")
        return obs
