"""Environment loop: warmup, update scheduling, evaluation and metrics rows."""
from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from ..envs import Env, make_env
from ..numgrad.rng import make_rng, stream_seed
from .config import TrainingConfig
from .replay import ReplayBuffer, Transition
from .sac import DETERMINISTIC, STOCHASTIC, HybridSAC

logger = logging.getLogger("hybrid-sac.trainer")

LOSS_KEYS = ("q1_loss", "q2_loss", "actor_loss_d", "actor_loss_c", "entropy_d", "entropy_c")


@dataclass(frozen=True)
class StepRecord:
    step: int
    reward: float
    done: bool
    truncated: bool
    updates: int
    episode_return: float | None = None
    info: dict[str, Any] = field(default_factory=dict)
    update_metrics: dict[str, Any] | None = None


def evaluate_agent(agent: HybridSAC, env: Env, episodes: int, seed: int, mode: str = DETERMINISTIC) -> list[float]:
    returns = []
    for i in range(episodes):
        obs = env.reset(seed=stream_seed(seed, "eval-episode", i))
        total = 0.0
        while True:
            result = env.step(agent.act(obs, mode))
            total += result.reward
            if result.done or result.truncated:
                break
            obs = result.observation
        returns.append(total)
    return returns


def metrics_columns(agent: HybridSAC) -> list[str]:
    """MetricsRow header; one conditional-entropy column per joint discrete action."""
    cols = ["step", "episode_return_mean", *LOSS_KEYS[:4], "alpha_d", "alpha_c", "entropy_d", "entropy_c"]
    if agent.spec.continuous:
        cols += [f"entropy_c_{k}" for k in range(agent.spec.joint_cardinality)]
    return cols


class Trainer:
    def __init__(self, env_name: str, config: TrainingConfig, seed: int = 0) -> None:
        self.env_name = env_name
        self.config = config
        self.seed = int(seed)
        self.env = make_env(env_name, stream_seed(self.seed, "train-env"))
        self.eval_env = make_env(env_name, stream_seed(self.seed, "eval-env"))
        self.agent = HybridSAC(env_name, self.env.spec, config, self.seed)
        self.buffer = ReplayBuffer(config.buffer_size, self.env.spec.observation_dim, self.env.spec.action_spec)
        self._warmup_rng = make_rng(self.seed, "warmup")
        self._sample_rng = make_rng(self.seed, "replay")
        self._ratio = Fraction(str(config.update_ratio))
        self._credit = Fraction(0)
        self.env_steps = 0
        self.episodes = 0
        self.obs = self.env.reset(seed=stream_seed(self.seed, "episode", 0))
        self._episode_return = 0.0
        self._pending: list[dict[str, Any]] = []

    def train_step(self) -> StepRecord:
        """One environment transition plus the updates it pays for."""
        if self.env_steps < self.config.warmup_steps:
            action = self.env.sample_action(self._warmup_rng)
        else:
            action = self.agent.act(self.obs, STOCHASTIC)
        result = self.env.step(action)
        self.buffer.add(Transition(self.obs, action, result.reward, result.observation, result.done))
        self.env_steps += 1
        self._episode_return += result.reward

        episode_return = None
        if result.done or result.truncated:
            episode_return = self._episode_return
            self.episodes += 1
            self._episode_return = 0.0
            self.obs = self.env.reset(seed=stream_seed(self.seed, "episode", self.episodes))
        else:
            self.obs = result.observation

        n_updates = 0
        last = None
        if self.env_steps > self.config.warmup_steps and len(self.buffer) > 0:
            self._credit += self._ratio
            n_updates = int(self._credit)
            self._credit -= n_updates
            for _ in range(n_updates):
                batch = self.buffer.sample(self.config.batch_size, self._sample_rng)
                last = self.agent.update(batch)
                self._pending.append(last)
        return StepRecord(
            self.env_steps, result.reward, result.done, result.truncated, n_updates, episode_return, result.info, last
        )

    def evaluate(self, episodes: int | None = None, mode: str = DETERMINISTIC) -> list[float]:
        """Returns of deterministic episodes on a separately seeded env."""
        return evaluate_agent(self.agent, self.eval_env, episodes or self.config.eval_episodes, self.seed, mode)

    def metrics_row(self) -> dict[str, Any]:
        """Aggregate the updates since the previous row with a fresh evaluation."""
        returns = self.evaluate()
        row: dict[str, Any] = {"step": self.env_steps, "episode_return_mean": float(np.mean(returns))}
        for key in LOSS_KEYS:
            row[key] = float(np.mean([m[key] for m in self._pending])) if self._pending else 0.0
        row["alpha_d"] = self.agent.alpha_d
        row["alpha_c"] = self.agent.alpha_c
        if self.agent.spec.continuous:
            k = self.agent.spec.joint_cardinality
            if self._pending:
                per_action = np.mean([np.broadcast_to(m["entropy_c_per_action"], (k,)) for m in self._pending], axis=0)
            else:
                per_action = np.zeros(k)
            for i in range(k):
                row[f"entropy_c_{i}"] = float(per_action[i])
        self._pending = []
        return {col: row[col] for col in metrics_columns(self.agent)}

    def run(
        self,
        total_steps: int | None = None,
        on_row: Callable[[dict[str, Any]], None] | None = None,
        on_checkpoint: Callable[[int], None] | None = None,
    ) -> list[dict[str, Any]]:
        total = total_steps or self.config.total_steps
        rows = []
        for _ in range(total):
            self.train_step()
            if self.env_steps % self.config.eval_interval == 0:
                row = self.metrics_row()
                rows.append(row)
                logger.info(
                    "step %d: eval return %.4f alpha_d %.4g alpha_c %.4g",
                    row["step"], row["episode_return_mean"], row["alpha_d"], row["alpha_c"],
                )
                if on_row is not None:
                    on_row(row)
            interval = self.config.checkpoint_interval
            if on_checkpoint is not None and interval and self.env_steps % interval == 0:
                on_checkpoint(self.env_steps)
        return rows
