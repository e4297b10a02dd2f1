"""Kinematic car following a waypoint path with two sharp left corners.

State is (x, y, heading, speed). Continuous actions are acceleration and
steering in [-1, 1]; the binary hand brake scales speed by 0.6 before the
acceleration is integrated and doubles the yaw rate for that step. The
reward is path progress minus half the distance to the path; leaving the
path by more than 1.0 ends the episode. Episodes run for 500 steps of 0.1 s,
too short to finish the path at top speed, so cornering speed matters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..policykit.spec import Bounds, HybridAction, HybridActionSpec
from .base import Env, EnvSpec

DT = 0.1
MAX_SPEED = 5.0
MAX_ACCEL = 2.0
YAW_RATE = 1.0
BRAKE_FACTOR = 0.6
OFF_PATH = 1.0
CROSS_TRACK_WEIGHT = 0.5
CORNER_RADIUS = 5.0
CORNER_SCALE = 20.0

# scripted controller
LOOKAHEAD = 2.0
CORNER_SPEED = 1.5
BRAKE_ZONE = LOOKAHEAD + 1.0

WAYPOINTS = np.array([[0.0, 0.0], [120.0, 0.0], [120.0, 60.0], [0.0, 60.0]])


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


@dataclass(frozen=True)
class PathProjection:
    segment: int
    arc_length: float
    cross_track: float  # signed, positive left of the path
    point: np.ndarray


class Path:
    def __init__(self, waypoints: np.ndarray) -> None:
        self.waypoints = np.asarray(waypoints, dtype=np.float64)
        deltas = np.diff(self.waypoints, axis=0)
        self.lengths = np.linalg.norm(deltas, axis=1)
        self.directions = deltas / self.lengths[:, None]
        self.headings = np.arctan2(deltas[:, 1], deltas[:, 0])
        self.starts = np.concatenate([[0.0], np.cumsum(self.lengths)])
        self.total_length = float(self.starts[-1])
        # interior waypoints, with the signed turn taken there
        self.corner_arc = self.starts[1:-1]
        self.corner_turn = np.array(
            [_wrap(self.headings[i + 1] - self.headings[i]) for i in range(len(self.lengths) - 1)]
        )

    def project(self, position: np.ndarray) -> PathProjection:
        best = None
        for i, (start, direction, length) in enumerate(zip(self.waypoints[:-1], self.directions, self.lengths)):
            t = float(np.clip(np.dot(position - start, direction), 0.0, length))
            point = start + t * direction
            offset = position - point
            dist = float(np.hypot(offset[0], offset[1]))
            if best is None or dist < best[0] - 1e-12:
                side = direction[0] * offset[1] - direction[1] * offset[0]
                best = (dist, PathProjection(i, float(self.starts[i] + t), math.copysign(dist, side), point))
        return best[1]

    def point_at(self, arc_length: float) -> np.ndarray:
        s = float(np.clip(arc_length, 0.0, self.total_length))
        i = int(min(np.searchsorted(self.starts, s, side="right") - 1, len(self.lengths) - 1))
        return self.waypoints[i] + (s - self.starts[i]) * self.directions[i]

    def next_corner(self, arc_length: float) -> tuple[float, float]:
        """Arc distance to the next corner and its turn sign; (inf, 0) past the last one."""
        for s, turn in zip(self.corner_arc, self.corner_turn):
            if s > arc_length:
                return float(s - arc_length), float(np.sign(turn))
        return math.inf, 0.0

    def corner_distance(self, position: np.ndarray) -> float:
        corners = self.waypoints[1:-1]
        return float(np.min(np.linalg.norm(corners - position, axis=1)))


PATH = Path(WAYPOINTS)


class DrivePath(Env):
    spec = EnvSpec(
        name="drive_path",
        observation_dim=7,
        action_spec=HybridActionSpec(discrete=(2,), continuous=(1, 1)),
        bounds=(Bounds((-1.0,), (1.0,)), Bounds((-1.0,), (1.0,))),
        max_episode_steps=500,
        reward_range=(-MAX_SPEED * DT - CROSS_TRACK_WEIGHT * OFF_PATH, MAX_SPEED * DT),
    )

    def __init__(self, seed: int = 0) -> None:
        super().__init__(seed)
        self.path = PATH
        self.position = np.zeros(2)
        self.heading = 0.0
        self.speed = 0.0
        self.arc_length = 0.0

    def observation(self) -> np.ndarray:
        proj = self.path.project(self.position)
        error = _wrap(self.heading - self.path.headings[proj.segment])
        to_corner, turn = self.path.next_corner(proj.arc_length)
        return np.array(
            [
                float(np.clip(proj.cross_track / OFF_PATH, -1.0, 1.0)),
                math.sin(error),
                math.cos(error),
                self.speed / MAX_SPEED,
                min(to_corner / CORNER_SCALE, 1.0),
                turn,
                proj.arc_length / self.path.total_length,
            ]
        )

    def _reset(self, options: dict[str, Any]) -> np.ndarray:
        self.position = np.asarray(options.get("position", (0.0, 0.0)), dtype=np.float64).copy()
        self.heading = float(options.get("heading", 0.0))
        self.speed = float(np.clip(options.get("speed", 0.0), 0.0, MAX_SPEED))
        self.arc_length = self.path.project(self.position).arc_length
        return self.observation()

    def _step(self, action: HybridAction) -> tuple[np.ndarray, float, bool, dict[str, Any]]:
        accel = float(np.clip(action.continuous[0][0], -1.0, 1.0))
        steer = float(np.clip(action.continuous[1][0], -1.0, 1.0))
        brake = action.discrete[0] == 1

        speed = self.speed * (BRAKE_FACTOR if brake else 1.0)
        self.speed = float(np.clip(speed + accel * MAX_ACCEL * DT, 0.0, MAX_SPEED))
        self.heading = _wrap(self.heading + steer * YAW_RATE * (2.0 if brake else 1.0) * DT)
        self.position = self.position + self.speed * DT * np.array([math.cos(self.heading), math.sin(self.heading)])

        proj = self.path.project(self.position)
        # Corner cutting can move the projection between segments; keep each
        # step's progress within what the car can physically cover.
        progress = float(np.clip(proj.arc_length - self.arc_length, -MAX_SPEED * DT, MAX_SPEED * DT))
        self.arc_length = proj.arc_length
        off_path = abs(proj.cross_track) > OFF_PATH
        reward = progress - CROSS_TRACK_WEIGHT * min(abs(proj.cross_track), OFF_PATH)
        finished = self.arc_length >= self.path.total_length - 1e-9
        info = {
            "hand_brake": brake,
            "segment": proj.segment,
            "near_corner": self.path.corner_distance(self.position) < CORNER_RADIUS,
            "cross_track": proj.cross_track,
            "off_path": off_path,
        }
        return self.observation(), reward, off_path or finished, info


def scripted_policy(env: DrivePath, use_brake: bool = True) -> HybridAction:
    """Pure pursuit on a look-ahead point with a corner speed profile.

    Without the brake the car slows with full reverse acceleration, which
    starts far before the corner; with it the car holds top speed longer and
    brakes late.
    """
    proj = env.path.project(env.position)
    target = env.path.point_at(proj.arc_length + LOOKAHEAD)
    desired = math.atan2(target[1] - env.position[1], target[0] - env.position[0])
    error = _wrap(desired - env.heading)
    to_corner, _ = env.path.next_corner(proj.arc_length)
    turning = abs(error) > 0.3

    brake = False
    if use_brake:
        brake = env.speed > CORNER_SPEED and to_corner < BRAKE_ZONE
        slow = turning or to_corner < BRAKE_ZONE
    else:
        stopping = max(env.speed**2 - CORNER_SPEED**2, 0.0) / (2.0 * MAX_ACCEL)
        slow = turning or to_corner < max(stopping + env.speed * DT, 1.0) + LOOKAHEAD
    if brake:
        accel = 0.0
    elif slow:
        accel = float(np.clip((CORNER_SPEED - env.speed) / (MAX_ACCEL * DT), -1.0, 1.0))
    else:
        accel = 1.0

    yaw = YAW_RATE * (2.0 if brake else 1.0) * DT
    steer = float(np.clip(error / yaw, -1.0, 1.0))
    return HybridAction((int(brake),), (np.array([accel]), np.array([steer])))

