from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any

from ..errors import ConfigError
from ..numgrad.nets import ACTIVATIONS
from .objectives import ObjectiveKind
from .target import GaussianMixtureTarget

DEFAULT_ALPHAS = (0.5, 1.0, 2.0, 8.0)
EXPERIMENTS = ("sweep", "grid")


@dataclass(frozen=True)
class MatchConfig:
    """Settings for fitting one policy to the mixture target and for the sweeps built on it."""

    steps: int = 10_000
    alpha: float = 1.0
    n_flows: int = 0
    batch_size: int = 256
    seed: int = 0
    objective: str = ObjectiveKind.FORWARD_KL.value
    learning_rate: float = 3e-4
    hidden_sizes: tuple[int, ...] = (64, 64)
    activation: str = "relu"
    state_dim: int = 8
    squash: bool = False
    # sweep and reporting
    experiment: str = "sweep"
    alphas: tuple[float, ...] = DEFAULT_ALPHAS
    mode_samples: int = 10_000
    kde_samples: int = 2000
    grid_points: int = 101
    grid_limit: float = 5.0
    max_workers: int = 1
    # mixture target; the default is two well separated modes in the plane
    weights: tuple[float, ...] = (0.5, 0.5)
    means: tuple[tuple[float, ...], ...] = ((-2.0, -2.0), (2.0, 2.0))
    stds: tuple = (0.5, 0.5)

    def __post_init__(self) -> None:
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "means", tuple(tuple(float(x) for x in row) for row in self.means))
        object.__setattr__(self, "stds", tuple(self._plain(s) for s in self.stds))
        try:
            ObjectiveKind(self.objective)
        except ValueError:
            known = ", ".join(k.value for k in ObjectiveKind)
            raise ConfigError(f"unknown objective '{self.objective}' (known: {known})", key="divlab.objective") from None
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment '{self.experiment}' (known: {', '.join(EXPERIMENTS)})", key="divlab.experiment")
        if self.alpha <= 0.0 or any(a <= 0.0 for a in self.alphas):
            raise ConfigError("temperatures must be positive", key="divlab.alpha")
        for name in ("steps", "batch_size", "mode_samples", "state_dim", "max_workers"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1", key=f"divlab.{name}")
        if self.kde_samples < 2 or self.grid_points < 2:
            raise ConfigError("kde_samples and grid_points must be >= 2", key="divlab.kde_samples")
        if self.n_flows < 0:
            raise ConfigError("n_flows must be >= 0", key="divlab.n_flows")
        if self.learning_rate <= 0.0 or self.grid_limit <= 0.0:
            raise ConfigError("learning_rate and grid_limit must be positive", key="divlab.learning_rate")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unsupported activation '{self.activation}'", key="divlab.activation")
        # validates weights, means and stds together
        self.target()

    @staticmethod
    def _plain(value: Any):
        if isinstance(value, (list, tuple)):
            return tuple(float(v) for v in value)
        return float(value)

    @property
    def kind(self) -> ObjectiveKind:
        return ObjectiveKind(self.objective)

    def target(self) -> GaussianMixtureTarget:
        return GaussianMixtureTarget(self.weights, self.means, self.stds)

    def replace(self, **changes: Any) -> "MatchConfig":
        return dataclasses.replace(self, **changes)
