"""5x5 grid from (0, 0) to the goal at (4, 4); purely discrete actions."""
from __future__ import annotations

from typing import Any

import numpy as np

from ..policykit.spec import HybridAction, HybridActionSpec
from .base import Env, EnvSpec

SIZE = 5
GOAL = (4, 4)
STEP_REWARD = -1.0
GOAL_REWARD = 10.0
RIGHT, UP, LEFT, DOWN = 0, 1, 2, 3
MOVES = {RIGHT: (1, 0), UP: (0, 1), LEFT: (-1, 0), DOWN: (0, -1)}


class GridWorld(Env):
    spec = EnvSpec(
        name="grid_world",
        observation_dim=2,
        action_spec=HybridActionSpec(discrete=(4,), continuous=()),
        bounds=(),
        max_episode_steps=50,
        reward_range=(STEP_REWARD, STEP_REWARD + GOAL_REWARD),
    )

    def __init__(self, seed: int = 0) -> None:
        super().__init__(seed)
        self.cell = (0, 0)

    def observation(self) -> np.ndarray:
        half = (SIZE - 1) / 2.0
        return np.array([self.cell[0] / half - 1.0, self.cell[1] / half - 1.0])

    def _reset(self, options: dict[str, Any]) -> np.ndarray:
        x, y = options.get("cell", (0, 0))
        self.cell = (int(x), int(y))
        return self.observation()

    def _step(self, action: HybridAction) -> tuple[np.ndarray, float, bool, dict[str, Any]]:
        dx, dy = MOVES[action.discrete[0]]
        x = min(max(self.cell[0] + dx, 0), SIZE - 1)
        y = min(max(self.cell[1] + dy, 0), SIZE - 1)
        self.cell = (x, y)
        at_goal = self.cell == GOAL
        reward = STEP_REWARD + (GOAL_REWARD if at_goal else 0.0)
        return self.observation(), reward, at_goal, {"cell": self.cell}


def scripted_policy(env: GridWorld) -> HybridAction:
    """Shortest path: right along the bottom row, then up."""
    move = RIGHT if env.cell[0] < GOAL[0] else UP
    return HybridAction((move,), ())
