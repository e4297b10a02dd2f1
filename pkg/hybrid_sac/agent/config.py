"""Training hyperparameters and named presets."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any

from ..errors import ConfigError
from ..numgrad.nets import ACTIVATIONS


@dataclass(frozen=True)
class TrainingConfig:
    preset: str = "desk"
    gamma: float = 0.99
    tau: float = 0.005
    actor_lr: float = 3e-4
    critic_lr: float = 3e-4
    alpha_lr: float = 3e-4
    batch_size: int = 256
    buffer_size: int = 100_000
    # gradient updates per environment step
    update_ratio: float = 0.25
    total_steps: int = 100_000
    warmup_steps: int = 1000
    eval_interval: int = 5000
    eval_episodes: int = 5
    checkpoint_interval: int = 0
    hidden_sizes: tuple[int, ...] = (64, 64)
    activation: str = "relu"
    n_flows: int = 0
    squash: bool = True
    auto_tune_alpha: bool = True
    init_alpha: float = 1.0
    # None selects 0.5 ln K per discrete component / -(continuous dims)
    target_entropy_d: float | None = None
    target_entropy_c: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must lie in [0, 1], got {self.gamma}", key="agent.gamma")
        if not 0.0 < self.tau <= 1.0:
            raise ConfigError(f"tau must lie in (0, 1], got {self.tau}", key="agent.tau")
        if self.update_ratio <= 0.0:
            raise ConfigError(f"update_ratio must be positive, got {self.update_ratio}", key="agent.update_ratio")
        for name in ("actor_lr", "critic_lr", "alpha_lr", "init_alpha"):
            if getattr(self, name) <= 0.0:
                raise ConfigError(f"{name} must be positive", key=f"agent.{name}")
        for name in ("batch_size", "buffer_size", "total_steps", "eval_interval", "eval_episodes"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1", key=f"agent.{name}")
        for name in ("warmup_steps", "checkpoint_interval", "n_flows"):
            if int(getattr(self, name)) < 0:
                raise ConfigError(f"{name} must be >= 0", key=f"agent.{name}")
        if not self.hidden_sizes or min(self.hidden_sizes) < 1:
            raise ConfigError(f"hidden_sizes needs at least one positive size, got {self.hidden_sizes}", key="agent.hidden_sizes")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unsupported activation '{self.activation}'", key="agent.activation")

    @classmethod
    def from_preset(cls, name: str = "desk", **overrides: Any) -> "TrainingConfig":
        try:
            base = PRESETS[name]
        except KeyError:
            raise ConfigError(f"unknown preset '{name}' (known: {', '.join(PRESETS)})", key="preset") from None
        known = {f.name for f in dataclasses.fields(cls)}
        for key in overrides:
            if key not in known:
                raise ConfigError(f"unknown agent setting '{key}'", key=f"agent.{key}")
        return cls(**{**base, **overrides, "preset": name})

    def replace(self, **changes: Any) -> "TrainingConfig":
        return dataclasses.replace(self, **changes)


PRESETS: dict[str, dict[str, Any]] = {
    "desk": {},
    # Bullet Roboschool settings: fixed temperature, larger networks and buffer.
    "roboschool": {
        "gamma": 0.99,
        "tau": 0.005,
        "actor_lr": 3e-4,
        "critic_lr": 3e-4,
        "alpha_lr": 3e-4,
        "batch_size": 1024,
        "buffer_size": 1_000_000,
        "update_ratio": 0.1,
        "total_steps": 10_000_000,
        "hidden_sizes": (256, 256),
        "activation": "relu",
        "n_flows": 3,
        "auto_tune_alpha": False,
        "init_alpha": 0.05,
    },
}
