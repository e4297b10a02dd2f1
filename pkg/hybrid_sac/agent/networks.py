"""Actor and twin-critic networks.

The actor runs a shared trunk over the observation and reads every head
from the resulting hidden state: one logits layer per discrete component,
one mean and one log-std layer per continuous component, plus an optional
radial flow stack per continuous component. The critic maps the
observation concatenated with all continuous components to one Q-value per
joint discrete action.
"""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from ..numgrad import ops
from ..numgrad.nets import MlpConfig, apply_mlp, init_params
from ..numgrad.params import ParameterSet
from ..numgrad.tape import Var
from ..policykit.categorical import CategoricalHead
from ..policykit.flows import flow_layers, init_flow_params
from ..policykit.gaussian import GaussianHead
from ..policykit.hybrid import HybridHeads
from ..policykit.spec import Bounds, HybridActionSpec


@dataclass(frozen=True)
class ActorNet:
    obs_dim: int
    spec: HybridActionSpec
    bounds: tuple[Bounds | None, ...]
    hidden_sizes: tuple[int, ...] = (64, 64)
    activation: str = "relu"
    n_flows: int = 0
    squash: bool = True

    @property
    def trunk(self) -> MlpConfig:
        return MlpConfig(
            input_dim=self.obs_dim,
            output_dim=self.hidden_sizes[-1],
            hidden_sizes=self.hidden_sizes[:-1],
            activation=self.activation,
            output_activation=self.activation,
        )

    def _head(self, width: int) -> MlpConfig:
        return MlpConfig(input_dim=self.hidden_sizes[-1], output_dim=width, hidden_sizes=())

    def init(self, seed: int) -> ParameterSet:
        parts = {"trunk": init_params(self.trunk, seed, prefix="trunk.")}
        for i, k in enumerate(self.spec.discrete):
            parts[f"logits.{i}"] = init_params(self._head(k), seed, prefix=f"logits.{i}.")
        for j, m in enumerate(self.spec.continuous):
            parts[f"mean.{j}"] = init_params(self._head(m), seed, prefix=f"mean.{j}.")
            parts[f"log_std.{j}"] = init_params(self._head(m), seed, prefix=f"log_std.{j}.")
            if self.n_flows:
                parts[f"flow.{j}"] = init_flow_params(m, self.n_flows, seed, prefix=f"flow.{j}.")
        return ParameterSet.merge(parts.values())

    def heads(self, pvars: Mapping[str, Var], obs: Var) -> HybridHeads:
        hidden = apply_mlp(pvars, self.trunk, obs, prefix="trunk.")
        discrete = tuple(
            CategoricalHead(apply_mlp(pvars, self._head(k), hidden, prefix=f"logits.{i}."))
            for i, k in enumerate(self.spec.discrete)
        )
        continuous = []
        flows = []
        for j, m in enumerate(self.spec.continuous):
            mean = apply_mlp(pvars, self._head(m), hidden, prefix=f"mean.{j}.")
            raw_log_std = apply_mlp(pvars, self._head(m), hidden, prefix=f"log_std.{j}.")
            continuous.append(GaussianHead.from_outputs(mean, raw_log_std))
            flows.append(tuple(flow_layers(pvars, self.n_flows, prefix=f"flow.{j}.")))
        return HybridHeads(discrete, tuple(continuous), tuple(flows), tuple(self.bounds), self.squash)


@dataclass(frozen=True)
class CriticNet:
    obs_dim: int
    spec: HybridActionSpec
    hidden_sizes: tuple[int, ...] = (64, 64)
    activation: str = "relu"

    @property
    def mlp(self) -> MlpConfig:
        return MlpConfig(
            input_dim=self.obs_dim + self.spec.continuous_dim,
            output_dim=self.spec.joint_cardinality,
            hidden_sizes=self.hidden_sizes,
            activation=self.activation,
        )

    def init(self, seed: int, name: str) -> ParameterSet:
        return init_params(self.mlp, seed, prefix=f"{name}/")

    def q_values(self, pvars: Mapping[str, Var], obs: Var, continuous: Var | None, name: str) -> Var:
        """``(batch, joint K)`` Q-values for every discrete action at the given continuous input."""
        x = obs if continuous is None else ops.concat([obs, continuous], axis=-1)
        return apply_mlp(pvars, self.mlp, x, prefix=f"{name}/")


def flat_continuous(actions: Sequence[Var]) -> Var | None:
    if not actions:
        return None
    return ops.concat(list(actions), axis=-1)
