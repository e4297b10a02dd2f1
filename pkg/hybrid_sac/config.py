"""Run configuration: one YAML file per run, resolved against presets and CLI flags.

Unknown keys are rejected at every level. Errors name the dotted key path
and, when the key came from the file, its line.
"""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .agent.config import PRESETS, TrainingConfig
from .divlab.config import MatchConfig
from .envs import ENVIRONMENTS
from .errors import ConfigError
from .utils.digest import config_digest, to_plain
from .utils.normalize import dotted, normalize_name

COMMANDS = ("train", "eval", "divlab", "gradcheck", "export", "status")


@dataclass(frozen=True)
class EvalConfig:
    checkpoint: str | None = None
    episodes: int = 10

    def __post_init__(self) -> None:
        if self.episodes < 1:
            raise ConfigError("episodes must be >= 1", key="eval.episodes")


@dataclass(frozen=True)
class ExportConfig:
    metrics: str | None = None
    smoothing: bool = True
    window: int = 7
    polyorder: int = 3

    def __post_init__(self) -> None:
        if self.window < 1 or self.window % 2 == 0:
            raise ConfigError(f"window must be a positive odd number, got {self.window}", key="export.window")
        if not 0 <= self.polyorder < self.window:
            raise ConfigError("polyorder must be >= 0 and below the window", key="export.polyorder")


@dataclass(frozen=True)
class RunConfig:
    command: str = "train"
    preset: str = "desk"
    env: str = "platform_lite"
    seeds: tuple[int, ...] = (0,)
    out: str = "runs"
    workers: int = 1
    agent: TrainingConfig = field(default_factory=TrainingConfig)
    divlab: MatchConfig = field(default_factory=MatchConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    export: ExportConfig = field(default_factory=ExportConfig)

    def __post_init__(self) -> None:
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "env", normalize_name(self.env))
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command '{self.command}' (known: {', '.join(COMMANDS)})", key="command")
        if self.preset not in PRESETS:
            raise ConfigError(f"unknown preset '{self.preset}' (known: {', '.join(PRESETS)})", key="preset")
        if self.env not in ENVIRONMENTS:
            raise ConfigError(f"unknown environment '{self.env}' (known: {', '.join(sorted(ENVIRONMENTS))})", key="env")
        if not self.seeds:
            raise ConfigError("at least one seed is required", key="seeds")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError(f"seeds must be distinct, got {self.seeds}", key="seeds")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1", key="workers")

    def resolved(self) -> dict[str, Any]:
        """Everything that can change an artifact; seeds, output dir and worker count excluded."""
        plain = to_plain(self)
        for key in ("seeds", "out", "workers"):
            plain.pop(key)
        return plain

    @property
    def digest(self) -> str:
        return config_digest(self.resolved())

    def replace(self, **changes: Any) -> "RunConfig":
        return dataclasses.replace(self, **changes)


_SECTIONS: dict[str, type] = {"divlab": MatchConfig, "eval": EvalConfig, "export": ExportConfig}
_SCALARS = ("command", "preset", "env", "seeds", "out", "workers")


def _key_lines(node: yaml.Node | None, prefix: str = "") -> dict[str, int]:
    lines: dict[str, int] = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            path = dotted(prefix, str(key_node.value))
            lines[path] = key_node.start_mark.line + 1
            lines.update(_key_lines(value_node, path))
    return lines


def parse_yaml(text: str) -> tuple[dict[str, Any], dict[str, int]]:
    """Mapping plus the line of every key, dotted-path keyed."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"malformed YAML: {problem}", line=line) from None
    if data is None:
        return {}, {}
    if not isinstance(data, dict):
        raise ConfigError("the config file must hold a mapping at the top level", line=1)
    return data, _key_lines(node)


def _check_keys(section: str, values: Any, allowed, lines: dict[str, int]) -> dict[str, Any]:
    if values is None:
        return {}
    if not isinstance(values, dict):
        raise ConfigError(f"section '{section}' must be a mapping", key=section, line=lines.get(section))
    for key in values:
        if key not in allowed:
            path = dotted(section, str(key))
            raise ConfigError(f"unknown setting '{path}'", key=path, line=lines.get(path))
    return values


def _field_names(cls: type) -> set[str]:
    return {f.name for f in dataclasses.fields(cls)}


def _build(factory, lines: dict[str, int], section: str, **kwargs):
    try:
        return factory(**kwargs)
    except ConfigError as exc:
        if exc.line is None and exc.key in lines:
            raise ConfigError(exc.detail, key=exc.key, line=lines[exc.key]) from None
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value in '{section}': {exc}", key=section, line=lines.get(section)) from None


def build_run_config(
    data: dict[str, Any],
    lines: dict[str, int] | None = None,
    *,
    command: str | None = None,
    preset: str | None = None,
    seeds: tuple[int, ...] | None = None,
    out: str | None = None,
    workers: int | None = None,
) -> RunConfig:
    """Resolve a parsed mapping; explicit keyword arguments win over file values."""
    lines = lines or {}
    _check_keys("", data, (*_SCALARS, "agent", *_SECTIONS), lines)

    scalars = {k: data[k] for k in _SCALARS if k in data}
    if isinstance(scalars.get("seeds"), int):
        scalars["seeds"] = (scalars["seeds"],)
    for key, value in (("command", command), ("preset", preset), ("seeds", seeds), ("out", out), ("workers", workers)):
        if value is not None:
            scalars[key] = value

    agent_values = _check_keys("agent", data.get("agent"), _field_names(TrainingConfig) - {"preset"}, lines)
    agent = _build(TrainingConfig.from_preset, lines, "agent", name=scalars.get("preset", "desk"), **agent_values)
    sections = {
        name: _build(cls, lines, name, **_check_keys(name, data.get(name), _field_names(cls), lines))
        for name, cls in _SECTIONS.items()
    }
    return _build(RunConfig, lines, "", agent=agent, **sections, **scalars)


def load_run_config(path: str | os.PathLike | None = None, **overrides: Any) -> RunConfig:
    if path is None:
        return build_run_config({}, **overrides)
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError(f"config file {path} does not exist") from None
    data, lines = parse_yaml(text)
    return build_run_config(data, lines, **overrides)
