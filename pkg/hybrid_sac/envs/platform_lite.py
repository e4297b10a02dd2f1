"""One-dimensional platformer with parameterized run/hop/leap moves.

The agent starts at p = 0 and must reach p = 1. Two gaps, [0.30, 0.38] and
[0.62, 0.72] (closed intervals), cut the track. Each move carries its own
parameter u in [0, 1]:

  run   advances 0.05 u           clears no gap
  hop   advances 0.08 + 0.06 u    clears the first gap
  leap  advances 0.12 + 0.10 u    clears both gaps

Landing inside a gap, or passing over a gap the move cannot clear, ends the
episode with reward 0 for that step. Otherwise the reward is the distance
gained, so a finished episode returns 1.0.
"""
from __future__ import annotations

from typing import Any

import numpy as np

from ..policykit.spec import PER_DISCRETE_ACTION, Bounds, HybridAction, HybridActionSpec
from .base import Env, EnvSpec

RUN, HOP, LEAP = 0, 1, 2
MOVE_NAMES = ("run", "hop", "leap")
GAPS = ((0.30, 0.38), (0.62, 0.72))
# (base advance, advance per unit of u, number of leading gaps the move clears)
MOVES = ((0.0, 0.05, 0), (0.08, 0.06, 1), (0.12, 0.10, 2))
GOAL = 1.0


def next_gap(p: float) -> int | None:
    for i, (start, _) in enumerate(GAPS):
        if p < start:
            return i
    return None


class PlatformLite(Env):
    spec = EnvSpec(
        name="platform_lite",
        observation_dim=5,
        action_spec=HybridActionSpec(discrete=(3,), continuous=(1, 1, 1), binding=PER_DISCRETE_ACTION),
        bounds=(Bounds((0.0,), (1.0,)),) * 3,
        max_episode_steps=200,
        reward_range=(0.0, 0.22),
    )

    def __init__(self, seed: int = 0) -> None:
        super().__init__(seed)
        self.position = 0.0

    def observation(self) -> np.ndarray:
        gap = next_gap(self.position)
        onehot = np.zeros(3)
        if gap is None:
            onehot[2] = 1.0
            distance = GOAL - self.position
        else:
            onehot[gap] = 1.0
            distance = GAPS[gap][0] - self.position
        return np.concatenate([[self.position, distance], onehot])

    def _reset(self, options: dict[str, Any]) -> np.ndarray:
        self.position = float(options.get("position", 0.0))
        return self.observation()

    def _step(self, action: HybridAction) -> tuple[np.ndarray, float, bool, dict[str, Any]]:
        move = action.discrete[0]
        raw = float(action.continuous[move][0])
        u = float(np.clip(raw, 0.0, 1.0))
        base, per_unit, clears = MOVES[move]
        start = self.position
        landing = start + base + per_unit * u
        info: dict[str, Any] = {"move": MOVE_NAMES[move], "parameter": u, "clamped": u != raw}

        for i, (gap_start, gap_end) in enumerate(GAPS):
            lands_in = gap_start <= landing <= gap_end
            passes_over = start < gap_start and landing > gap_end and i >= clears
            if lands_in or passes_over:
                info["fell"] = True
                self.position = min(landing, GOAL)
                return self.observation(), 0.0, True, info

        info["fell"] = False
        self.position = min(landing, GOAL)
        return self.observation(), self.position - start, self.position >= GOAL, info


def scripted_policy(env: PlatformLite) -> HybridAction:
    """Run at full speed until the next step would reach a gap, then jump just past it."""
    p = env.position
    gap = next_gap(p)
    params = [np.zeros(1), np.zeros(1), np.zeros(1)]
    if gap is None or p + MOVES[RUN][1] < GAPS[gap][0]:
        params[RUN][0] = 1.0
        return HybridAction((RUN,), tuple(params))
    move = HOP if gap == 0 else LEAP
    base, per_unit, _ = MOVES[move]
    target = GAPS[gap][1] + 0.01
    params[move][0] = float(np.clip((target - p - base) / per_unit, 0.0, 1.0))
    return HybridAction((move,), tuple(params))
