"""Desk-scale environments and their scripted baselines."""
from __future__ import annotations

from collections.abc import Callable

from ..errors import ConfigError
from ..policykit.spec import HybridAction
from ..utils.normalize import normalize_name
from . import drive_path, grid_world, platform_lite, point_mass
from .base import Env, EnvSpec, StepResult

ENVIRONMENTS: dict[str, type[Env]] = {
    "platform_lite": platform_lite.PlatformLite,
    "drive_path": drive_path.DrivePath,
    "point_mass": point_mass.PointMass,
    "grid_world": grid_world.GridWorld,
}

_SCRIPTS = {
    "platform_lite": platform_lite.scripted_policy,
    "drive_path": drive_path.scripted_policy,
    "point_mass": point_mass.scripted_policy,
    "grid_world": grid_world.scripted_policy,
}


def make_env(name: str, seed: int = 0) -> Env:
    try:
        cls = ENVIRONMENTS[normalize_name(name)]
    except KeyError:
        known = ", ".join(sorted(ENVIRONMENTS))
        raise ConfigError(f"unknown environment '{name}' (known: {known})", key="env") from None
    return cls(seed)


def scripted_policy(env: Env, **options) -> Callable[[], HybridAction]:
    """Baseline controller bound to ``env``; it reads the env state directly."""
    script = _SCRIPTS[env.spec.name]
    return lambda: script(env, **options)


def oracle_return(env: Env, seed: int = 0, reset_options: dict | None = None, **options) -> float:
    """Return of one scripted episode, the acceptance baseline for ``env``."""
    policy = scripted_policy(env, **options)
    env.reset(seed=seed, options=reset_options)
    total = 0.0
    while True:
        result = env.step(policy())
        total += result.reward
        if result.done or result.truncated:
            return total


__all__ = [
    "ENVIRONMENTS",
    "Env",
    "EnvSpec",
    "StepResult",
    "make_env",
    "oracle_return",
    "scripted_policy",
]
