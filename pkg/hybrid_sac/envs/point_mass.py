"""Point mass pushed toward the origin; purely continuous actions."""
from __future__ import annotations

from typing import Any

import numpy as np

from ..policykit.spec import Bounds, HybridAction, HybridActionSpec
from .base import Env, EnvSpec

DT = 0.1
LIMIT = 2.0
GOAL = np.zeros(2)


class PointMass(Env):
    spec = EnvSpec(
        name="point_mass",
        observation_dim=4,
        action_spec=HybridActionSpec(discrete=(), continuous=(2,)),
        bounds=(Bounds.symmetric(2),),
        max_episode_steps=100,
        reward_range=(-LIMIT * np.sqrt(2.0), 0.0),
    )

    def __init__(self, seed: int = 0) -> None:
        super().__init__(seed)
        self.position = np.zeros(2)
        self.velocity = np.zeros(2)

    def observation(self) -> np.ndarray:
        return np.concatenate([self.position, self.velocity]) / LIMIT

    def _reset(self, options: dict[str, Any]) -> np.ndarray:
        if "position" in options:
            self.position = np.asarray(options["position"], dtype=np.float64).copy()
        else:
            self.position = self._rng.uniform(-1.0, 1.0, size=2)
        self.velocity = np.asarray(options.get("velocity", (0.0, 0.0)), dtype=np.float64).copy()
        return self.observation()

    def _step(self, action: HybridAction) -> tuple[np.ndarray, float, bool, dict[str, Any]]:
        accel = np.clip(action.continuous[0], -1.0, 1.0)
        self.velocity = np.clip(self.velocity + accel * DT, -LIMIT, LIMIT)
        self.position = np.clip(self.position + self.velocity * DT, -LIMIT, LIMIT)
        distance = float(np.linalg.norm(self.position - GOAL))
        return self.observation(), -distance, False, {"distance": distance}


def scripted_policy(env: PointMass, kp: float = 1.0, kd: float = 1.5) -> HybridAction:
    """PD controller on position and velocity."""
    accel = np.clip(-kp * (env.position - GOAL) - kd * env.velocity, -1.0, 1.0)
    return HybridAction((), (accel,))
