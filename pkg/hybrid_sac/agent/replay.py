from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from ..policykit.spec import HybridAction, HybridActionSpec


@dataclass(frozen=True)
class Transition:
    s: np.ndarray
    a: HybridAction
    r: float
    s_next: np.ndarray
    # true terminal only; time-limit truncation keeps the bootstrap
    done: bool


@dataclass(frozen=True)
class Batch:
    obs: np.ndarray
    discrete: np.ndarray
    continuous: np.ndarray
    reward: np.ndarray
    next_obs: np.ndarray
    done: np.ndarray

    def __len__(self) -> int:
        return self.obs.shape[0]

    def joint_indices(self, spec: HybridActionSpec) -> np.ndarray:
        if not spec.discrete:
            return np.zeros(len(self), dtype=np.intp)
        return np.ravel_multi_index(tuple(self.discrete.T), spec.discrete).astype(np.intp)

    def actions(self, spec: HybridActionSpec) -> list[HybridAction]:
        return [HybridAction.from_flat(spec, d, c) for d, c in zip(self.discrete, self.continuous)]


class ReplayBuffer:
    """Fixed-capacity FIFO ring with uniform sampling (with replacement)."""

    def __init__(self, capacity: int, obs_dim: int, spec: HybridActionSpec) -> None:
        if capacity < 1:
            raise ContractError("replay capacity must be >= 1")
        self.capacity = int(capacity)
        self.spec = spec
        self.ptr = 0
        self.size = 0
        self.obs = np.zeros((capacity, obs_dim))
        self.discrete = np.zeros((capacity, len(spec.discrete)), dtype=np.int64)
        self.continuous = np.zeros((capacity, spec.continuous_dim))
        self.reward = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.done = np.zeros(capacity)

    def __len__(self) -> int:
        return self.size

    def add(self, transition: Transition) -> None:
        self.spec.validate(transition.a)
        flat = transition.a.flat_continuous()
        for value in (transition.s, transition.s_next, flat, [transition.r]):
            if not np.all(np.isfinite(value)):
                raise ContractError("transition holds non-finite values")
        i = self.ptr
        self.obs[i] = transition.s
        self.discrete[i] = transition.a.discrete
        self.continuous[i] = flat
        self.reward[i] = transition.r
        self.next_obs[i] = transition.s_next
        self.done[i] = float(transition.done)
        self.ptr = (self.ptr + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def oldest_index(self) -> int:
        return self.ptr if self.size == self.capacity else 0

    def sample_indices(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        if self.size == 0:
            raise ContractError("cannot sample from an empty replay buffer")
        return rng.integers(0, self.size, size=batch_size)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Batch:
        idx = self.sample_indices(batch_size, rng)
        return self.gather(idx)

    def gather(self, idx: np.ndarray) -> Batch:
        return Batch(
            obs=self.obs[idx],
            discrete=self.discrete[idx],
            continuous=self.continuous[idx],
            reward=self.reward[idx],
            next_obs=self.next_obs[idx],
            done=self.done[idx],
        )
