from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from . import ops
from .params import ParameterSet
from .rng import make_rng
from .tape import Tape, Var

ACTIVATIONS = ("relu", "tanh")


@dataclass(frozen=True)
class MlpConfig:
    input_dim: int
    output_dim: int
    hidden_sizes: tuple[int, ...] = (64, 64)
    activation: str = "relu"
    # Applied after the last layer too; used for shared trunks.
    output_activation: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "hidden_sizes", tuple(int(h) for h in self.hidden_sizes))
        dims = (self.input_dim, self.output_dim, *self.hidden_sizes)
        if any(int(d) < 1 for d in dims):
            raise ConfigError(f"all layer sizes must be >= 1, got {dims}")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"unsupported activation '{self.activation}'", key="activation")
        if self.output_activation not in (None, *ACTIVATIONS):
            raise ConfigError(f"unsupported activation '{self.output_activation}'", key="output_activation")

    @property
    def layer_dims(self) -> list[tuple[int, int]]:
        sizes = [self.input_dim, *self.hidden_sizes, self.output_dim]
        return list(zip(sizes[:-1], sizes[1:]))


def init_params(cfg: MlpConfig, seed: int, prefix: str = "") -> ParameterSet:
    """Xavier-uniform weights, zero biases; identical for identical seeds."""
    rng = make_rng(seed, "init", prefix)
    params = ParameterSet()
    for i, (fan_in, fan_out) in enumerate(cfg.layer_dims):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        params.add(f"{prefix}l{i}.w", rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        params.add(f"{prefix}l{i}.b", np.zeros(fan_out))
    return params


def apply_mlp(pvars: Mapping[str, Var], cfg: MlpConfig, x: Var, prefix: str = "") -> Var:
    if x.ndim != 2 or x.shape[1] != cfg.input_dim:
        raise ConfigError(f"expected input of shape (batch, {cfg.input_dim}), got {x.shape}")
    layers = cfg.layer_dims
    for i, (fan_in, fan_out) in enumerate(layers):
        try:
            w = pvars[f"{prefix}l{i}.w"]
            b = pvars[f"{prefix}l{i}.b"]
        except KeyError as exc:
            raise ConfigError(f"missing layer parameter {exc.args[0]}") from exc
        if w.shape != (fan_in, fan_out) or b.shape != (fan_out,):
            raise ConfigError(f"layer {prefix}l{i} has shape {w.shape}/{b.shape}, expected ({fan_in}, {fan_out})")
        x = ops.dense(x, w, b)
        if i < len(layers) - 1:
            x = ops.activation(x, cfg.activation)
        elif cfg.output_activation is not None:
            x = ops.activation(x, cfg.output_activation)
    return x


def mlp_forward(params: ParameterSet, cfg: MlpConfig, inputs) -> tuple[Var, Tape]:
    """Forward pass on a fresh tape.

    ``inputs`` may be a single vector or a (batch, input_dim) matrix; the
    output keeps the same rank.
    """
    arr = np.asarray(inputs, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    tape = Tape()
    pvars = tape.watch(params)
    out = apply_mlp(pvars, cfg, tape.constant(arr))
    if single:
        out = ops.reshape(out, (cfg.output_dim,))
    return out, tape
