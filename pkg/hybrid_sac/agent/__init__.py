"""Hybrid SAC: twin critics over per-discrete-action Q-values, a shared-trunk actor and two temperatures."""
from .config import PRESETS, TrainingConfig
from .networks import ActorNet, CriticNet
from .replay import Batch, ReplayBuffer, Transition
from .sac import DETERMINISTIC, STOCHASTIC, HybridSAC, UpdateNoise
from .temperature import TemperatureState, default_target_entropies, temperature_update
from .trainer import StepRecord, Trainer, evaluate_agent, metrics_columns
from .updates import (
    actor_losses,
    actor_update,
    continuous_policy_loss,
    critic_loss,
    critic_target,
    critic_update,
    discrete_policy_loss,
    evaluate_policy,
    polyak_update,
)

__all__ = [
    "DETERMINISTIC",
    "PRESETS",
    "STOCHASTIC",
    "ActorNet",
    "Batch",
    "CriticNet",
    "HybridSAC",
    "ReplayBuffer",
    "StepRecord",
    "TemperatureState",
    "Trainer",
    "TrainingConfig",
    "Transition",
    "UpdateNoise",
    "actor_losses",
    "actor_update",
    "continuous_policy_loss",
    "critic_loss",
    "critic_target",
    "critic_update",
    "default_target_entropies",
    "discrete_policy_loss",
    "evaluate_agent",
    "evaluate_policy",
    "metrics_columns",
    "polyak_update",
    "temperature_update",
]
