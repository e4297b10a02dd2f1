from __future__ import annotations

import dataclasses
import hashlib
import json
from typing import Any


def to_plain(value: Any) -> Any:
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return to_plain(dataclasses.asdict(value))
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if hasattr(value, "tolist") and callable(value.tolist):
        # numpy arrays and scalars
        return value.tolist()
    return value


def canonical_json(value: Any) -> str:
    return json.dumps(to_plain(value), sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_digest(config: Any) -> str:
    """SHA-256 over the canonical JSON form of a resolved configuration."""
    return hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()
