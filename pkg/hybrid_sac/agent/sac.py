"""Hybrid SAC agent: parameters, optimizers, acting and the full update."""
from __future__ import annotations

import dataclasses
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from ..envs import make_env
from ..envs.base import EnvSpec
from ..errors import CheckpointError, ContractError
from ..numgrad.adam import AdamState
from ..numgrad.checkpoint import load_checkpoint, save_checkpoint
from ..numgrad.params import ParameterSet
from ..numgrad.rng import make_rng
from ..numgrad.tape import Tape
from ..policykit.flows import flow_stack_sample
from ..policykit.spec import HybridAction
from .config import TrainingConfig
from .networks import ActorNet, CriticNet
from .replay import Batch
from .temperature import TemperatureState, default_target_entropies, temperature_update
from .updates import CRITICS, actor_losses, actor_update, critic_target, critic_update, polyak_update

logger = logging.getLogger("hybrid-sac.agent")

STOCHASTIC = "stochastic"
DETERMINISTIC = "deterministic"


@dataclass(frozen=True)
class UpdateNoise:
    """Standard normal draws, one array per continuous component."""

    target: list[np.ndarray]
    actor: list[np.ndarray]


class HybridSAC:
    def __init__(self, env_name: str, env_spec: EnvSpec, config: TrainingConfig, seed: int = 0) -> None:
        self.env_name = env_name
        self.env_spec = env_spec
        self.config = config
        self.seed = int(seed)
        self.spec = env_spec.action_spec
        self.actor = ActorNet(
            obs_dim=env_spec.observation_dim,
            spec=self.spec,
            bounds=env_spec.bounds,
            hidden_sizes=config.hidden_sizes,
            activation=config.activation,
            n_flows=config.n_flows,
            squash=config.squash,
        )
        self.critic = CriticNet(env_spec.observation_dim, self.spec, config.hidden_sizes, config.activation)

        self.params: dict[str, ParameterSet] = {"actor": self.actor.init(self.seed)}
        for name in CRITICS:
            self.params[name] = self.critic.init(self.seed, name)
            self.params[f"{name}_target"] = self.params[name].copy()
        self.optimizers: dict[str, AdamState] = {
            "actor": AdamState.for_params(self.params["actor"], config.actor_lr),
            **{name: AdamState.for_params(self.params[name], config.critic_lr) for name in CRITICS},
        }
        default_d, default_c = default_target_entropies(self.spec)
        self.temperature = TemperatureState.create(
            config.init_alpha,
            default_d if config.target_entropy_d is None else config.target_entropy_d,
            default_c if config.target_entropy_c is None else config.target_entropy_c,
            config.alpha_lr,
        )
        self.update_count = 0
        self._act_rng = make_rng(self.seed, "act")
        self._noise_rng = make_rng(self.seed, "update-noise")

    @classmethod
    def for_env(cls, env_name: str, config: TrainingConfig, seed: int = 0) -> "HybridSAC":
        return cls(env_name, make_env(env_name).spec, config, seed)

    @property
    def alpha_d(self) -> float:
        return self.temperature.alpha_d

    @property
    def alpha_c(self) -> float:
        return self.temperature.alpha_c

    # acting

    def act(self, obs: np.ndarray, mode: str = STOCHASTIC) -> HybridAction:
        return self.act_batch(np.asarray(obs, dtype=np.float64)[None, :], mode)[0]

    def act_batch(self, obs: np.ndarray, mode: str = STOCHASTIC) -> list[HybridAction]:
        """Sample (or pick the mode of) the policy for every row of ``obs``."""
        if mode not in (STOCHASTIC, DETERMINISTIC):
            raise ContractError(f"unknown acting mode '{mode}'")
        obs = np.asarray(obs, dtype=np.float64)
        n = obs.shape[0]
        tape = Tape()
        heads = self.actor.heads(tape.watch(self.params["actor"]), tape.constant(obs))

        discrete = []
        for head in heads.discrete:
            if mode == DETERMINISTIC:
                discrete.append(np.argmax(head.logits.value, axis=-1))
            else:
                discrete.append(head.sample(self._act_rng.random(n)))
        continuous = []
        for j, head in enumerate(heads.continuous):
            if mode == DETERMINISTIC:
                eps = np.zeros(head.mean.shape)
            else:
                eps = self._act_rng.standard_normal(head.mean.shape)
            sample, _ = flow_stack_sample(head, heads.flows[j], eps, heads.bounds[j], heads.squash)
            continuous.append(sample.action.value)

        actions = []
        for row in range(n):
            d = tuple(int(col[row]) for col in discrete)
            c = tuple(np.clip(vals[row], b.low, b.high) if b is not None else vals[row] for vals, b in zip(continuous, heads.bounds))
            actions.append(HybridAction(d, c))
        return actions

    # learning

    def draw_noise(self, batch_size: int) -> UpdateNoise:
        dims = self.spec.continuous
        target = [self._noise_rng.standard_normal((batch_size, m)) for m in dims]
        actor = [self._noise_rng.standard_normal((batch_size, m)) for m in dims]
        return UpdateNoise(target, actor)

    def update(self, batch: Batch, noise: UpdateNoise | None = None) -> dict[str, Any]:
        """Critics, then actor, then temperatures, then target smoothing."""
        noise = noise or self.draw_noise(len(batch))
        step = self.update_count + 1
        p = self.params
        alpha_d, alpha_c = self.alpha_d, self.alpha_c

        targets = critic_target(
            batch, self.actor, p["actor"], self.critic,
            {name: p[f"{name}_target"] for name in CRITICS},
            alpha_d, alpha_c, self.config.gamma, noise.target,
        )
        metrics: dict[str, Any] = dict(critic_update(batch, self.critic, p, self.optimizers, targets, step=step))

        actor_step = actor_losses(
            batch, self.actor, p["actor"], self.critic, {name: p[name] for name in CRITICS},
            alpha_d, alpha_c, noise.actor,
        )
        actor_update(actor_step, p["actor"], self.optimizers["actor"], step=step)

        if self.config.auto_tune_alpha:
            temperature_update(
                self.temperature,
                actor_step.entropy_d,
                actor_step.entropy_c,
                tune_d=bool(self.spec.discrete),
                tune_c=bool(self.spec.continuous),
            )
        for name in CRITICS:
            polyak_update(p[name], p[f"{name}_target"], self.config.tau)

        self.update_count = step
        metrics.update(
            actor_loss_d=actor_step.loss_d,
            actor_loss_c=actor_step.loss_c,
            alpha_d=self.alpha_d,
            alpha_c=self.alpha_c,
            entropy_d=actor_step.entropy_d,
            entropy_c=actor_step.entropy_c,
            entropy_c_per_action=actor_step.entropy_c_per_action,
        )
        return metrics

    # persistence

    def checkpoint_config(self) -> dict[str, Any]:
        return {"env": self.env_name, "seed": self.seed, "agent": dataclasses.asdict(self.config)}

    def save(self, path: str | os.PathLike, metadata: dict[str, Any] | None = None) -> Path:
        params = dict(self.params)
        params["temperature"] = self.temperature.params
        optimizers = dict(self.optimizers)
        optimizers["temperature"] = self.temperature.optimizer
        meta = {
            "update_count": self.update_count,
            "target_entropy_d": self.temperature.target_entropy_d,
            "target_entropy_c": self.temperature.target_entropy_c,
            **(metadata or {}),
        }
        return save_checkpoint(path, params, optimizers, self.checkpoint_config(), meta)

    @classmethod
    def load(cls, path: str | os.PathLike, expected_config: dict[str, Any] | None = None) -> "HybridSAC":
        """Rebuild an agent from a checkpoint written by :meth:`save`."""
        ckpt = load_checkpoint(path, expected_config=expected_config)
        try:
            agent_cfg = dict(ckpt.config["agent"])
            agent_cfg["hidden_sizes"] = tuple(agent_cfg["hidden_sizes"])
            config = TrainingConfig(**agent_cfg)
            agent = cls.for_env(ckpt.config["env"], config, int(ckpt.config["seed"]))
        except (KeyError, TypeError) as exc:
            raise CheckpointError(f"{path} does not hold an agent checkpoint: {exc}") from exc

        groups = {**agent.params, "temperature": agent.temperature.params}
        for name, pset in groups.items():
            stored = ckpt.params.get(name)
            if stored is None or stored.shapes != pset.shapes:
                raise CheckpointError(f"{path}: parameter group '{name}' is missing or has the wrong shapes")
        try:
            for name in agent.params:
                agent.params[name] = ckpt.params[name]
                if name in agent.optimizers:
                    agent.optimizers[name] = ckpt.optimizers[name]
            agent.temperature.params = ckpt.params["temperature"]
            agent.temperature.optimizer = ckpt.optimizers["temperature"]
            agent.temperature.target_entropy_d = float(ckpt.metadata["target_entropy_d"])
            agent.temperature.target_entropy_c = float(ckpt.metadata["target_entropy_c"])
        except KeyError as exc:
            raise CheckpointError(f"{path}: missing optimizer or temperature state {exc}") from exc
        agent.update_count = int(ckpt.metadata.get("update_count", 0))
        logger.info("Loaded %s agent for %s from %s", config.preset, agent.env_name, path)
        return agent
