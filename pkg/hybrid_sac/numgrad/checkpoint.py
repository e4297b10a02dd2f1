"""Checkpoint files.

Layout: a magic line, one line of JSON manifest (format version, config and
its digest, array table), then the arrays as little-endian float64 bytes in
manifest order. The payload carries its own SHA-256 so truncation and bit rot
are detected before anything is decoded.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import CheckpointDigestError, CheckpointError, CheckpointVersionError, MalformedCheckpointError
from ..utils.digest import config_digest, to_plain
from .adam import AdamState
from .params import ParameterSet

logger = logging.getLogger("hybrid-sac.numgrad")

MAGIC = b"HSAC-CHECKPOINT\n"
FORMAT_VERSION = 1
_DTYPE = np.dtype("<f8")


@dataclass
class Checkpoint:
    params: dict[str, ParameterSet]
    optimizers: dict[str, AdamState] = field(default_factory=dict)
    config: dict[str, Any] = field(default_factory=dict)
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def digest(self) -> str:
        return config_digest(self.config)


class _PayloadWriter:
    def __init__(self) -> None:
        self.chunks: list[bytes] = []
        self.offset = 0

    def table(self, arrays: dict[str, np.ndarray]) -> list[dict[str, Any]]:
        rows = []
        for name, arr in arrays.items():
            data = np.ascontiguousarray(arr, dtype=_DTYPE).tobytes()
            rows.append({"name": name, "shape": list(arr.shape), "offset": self.offset, "count": int(arr.size)})
            self.chunks.append(data)
            self.offset += len(data)
        return rows


def _read_table(rows: list[dict[str, Any]], payload: bytes) -> dict[str, np.ndarray]:
    arrays: dict[str, np.ndarray] = {}
    for row in rows:
        start = int(row["offset"])
        stop = start + int(row["count"]) * _DTYPE.itemsize
        if stop > len(payload):
            raise MalformedCheckpointError(f"array '{row['name']}' runs past the end of the payload")
        arr = np.frombuffer(payload[start:stop], dtype=_DTYPE).astype(np.float64)
        arrays[row["name"]] = arr.reshape(tuple(row["shape"]))
    return arrays


def save_checkpoint(
    path: str | os.PathLike,
    params: dict[str, ParameterSet],
    optimizers: dict[str, AdamState] | None = None,
    config: dict[str, Any] | None = None,
    metadata: dict[str, Any] | None = None,
) -> Path:
    path = Path(path)
    config = to_plain(config or {})
    writer = _PayloadWriter()
    groups = [{"name": name, "entries": writer.table(dict(pset.items()))} for name, pset in params.items()]
    opt_rows = []
    for name, state in (optimizers or {}).items():
        opt_rows.append(
            {
                "name": name,
                "learning_rate": state.learning_rate,
                "beta1": state.beta1,
                "beta2": state.beta2,
                "epsilon": state.epsilon,
                "step_count": state.step_count,
                "first_moment": writer.table(state.first_moment),
                "second_moment": writer.table(state.second_moment),
            }
        )
    payload = b"".join(writer.chunks)
    manifest = {
        "format_version": FORMAT_VERSION,
        "config_digest": config_digest(config),
        "config": config,
        "metadata": to_plain(metadata or {}),
        "groups": groups,
        "optimizers": opt_rows,
        "payload_bytes": len(payload),
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    line = json.dumps(manifest, sort_keys=True, separators=(",", ":")).encode("utf-8")
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(MAGIC)
        fh.write(line + b"\n")
        fh.write(payload)
    os.replace(tmp, path)
    logger.info("Checkpoint written to %s (%d bytes of arrays)", path, len(payload))
    return path


def load_checkpoint(path: str | os.PathLike, expected_config: dict[str, Any] | None = None) -> Checkpoint:
    """Read a checkpoint; with ``expected_config`` also check its digest."""
    try:
        raw = Path(path).read_bytes()
    except FileNotFoundError:
        raise CheckpointError(f"checkpoint {path} does not exist") from None
    if not raw.startswith(MAGIC):
        raise MalformedCheckpointError(f"{path} is not a checkpoint file")
    body = raw[len(MAGIC):]
    newline = body.find(b"\n")
    if newline < 0:
        raise MalformedCheckpointError(f"{path} has no complete manifest")
    try:
        manifest = json.loads(body[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedCheckpointError(f"{path} has an unreadable manifest: {exc}") from exc
    if not isinstance(manifest, dict):
        raise MalformedCheckpointError(f"{path} manifest is not a mapping")

    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(f"{path} has format version {version}, expected {FORMAT_VERSION}")

    payload = body[newline + 1:]
    try:
        if len(payload) != int(manifest["payload_bytes"]):
            raise MalformedCheckpointError(
                f"{path} payload is {len(payload)} bytes, manifest declares {manifest['payload_bytes']}"
            )
        if hashlib.sha256(payload).hexdigest() != manifest["payload_sha256"]:
            raise MalformedCheckpointError(f"{path} payload checksum does not match")
        config = manifest["config"]
        stored_digest = manifest["config_digest"]
        params = {g["name"]: ParameterSet(_read_table(g["entries"], payload)) for g in manifest["groups"]}
        optimizers = {
            o["name"]: AdamState(
                learning_rate=float(o["learning_rate"]),
                beta1=float(o["beta1"]),
                beta2=float(o["beta2"]),
                epsilon=float(o["epsilon"]),
                step_count=int(o["step_count"]),
                first_moment=_read_table(o["first_moment"], payload),
                second_moment=_read_table(o["second_moment"], payload),
            )
            for o in manifest["optimizers"]
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedCheckpointError(f"{path} manifest is incomplete: {exc}") from exc

    if config_digest(config) != stored_digest:
        raise CheckpointDigestError(f"{path} config does not match its recorded digest")
    if expected_config is not None and config_digest(expected_config) != stored_digest:
        raise CheckpointDigestError(
            f"{path} was written for config {stored_digest[:12]}, current config is {config_digest(expected_config)[:12]}"
        )
    return Checkpoint(params=params, optimizers=optimizers, config=config, metadata=manifest.get("metadata", {}))
