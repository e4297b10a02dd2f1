"""Exception hierarchy shared by every layer of the package."""
from __future__ import annotations


class HybridSACError(Exception):
    """Base class for failures the CLI reports as a one-line diagnostic."""


class ConfigError(HybridSACError):
    def __init__(self, message: str, *, key: str | None = None, line: int | None = None) -> None:
        self.detail = message
        self.key = key
        self.line = line
        where = []
        if key:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")


class ContractError(HybridSACError):
    pass


class TrainingError(HybridSACError):
    def __init__(self, message: str, *, step: int | None = None) -> None:
        self.step = step
        super().__init__(message if step is None else f"{message} (update {step})")


class EnvironmentFault(HybridSACError):
    pass


class CheckpointError(HybridSACError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointDigestError(CheckpointError):
    pass


class MalformedCheckpointError(CheckpointError):
    pass


class ObjectiveError(HybridSACError):
    def __init__(self, message: str, *, trace: list[float] | None = None) -> None:
        self.trace = list(trace or [])
        super().__init__(message)
