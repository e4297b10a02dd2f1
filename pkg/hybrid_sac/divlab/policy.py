"""Policy fitted to the mixture target from one fixed state.

The network is the actor's architecture minus the discrete heads: an MLP on
``s0`` produces the mean and log-std of a diagonal Gaussian, optionally
followed by a stack of radial flows. Since the state never changes, every
sample shares the same head and only the noise differs.
"""
from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from ..numgrad import ops
from ..numgrad.nets import MlpConfig, apply_mlp, init_params
from ..numgrad.params import ParameterSet
from ..numgrad.rng import make_rng
from ..numgrad.tape import Tape, Var
from ..policykit.flows import RadialFlowParams, continuous_log_prob, flow_layers, flow_stack_sample, init_flow_params
from ..policykit.gaussian import GaussianHead, SquashedSample
from ..policykit.spec import Bounds

STATE_SEED = 0
SQUASH_LIMIT = 5.0


def fixed_state(dim: int = 8, seed: int = STATE_SEED) -> np.ndarray:
    """The state every sample is conditioned on, drawn once from N(0, I)."""
    return make_rng(seed, "divlab-state").standard_normal(dim)


@dataclass(frozen=True)
class MatchPolicy:
    dim: int = 2
    state_dim: int = 8
    hidden_sizes: tuple[int, ...] = (64, 64)
    activation: str = "relu"
    n_flows: int = 0
    squash: bool = False

    @property
    def net(self) -> MlpConfig:
        return MlpConfig(self.state_dim, 2 * self.dim, self.hidden_sizes, self.activation)

    @property
    def bounds(self) -> Bounds | None:
        return Bounds.symmetric(self.dim, SQUASH_LIMIT) if self.squash else None

    @property
    def state(self) -> np.ndarray:
        return fixed_state(self.state_dim)

    def init(self, seed: int) -> ParameterSet:
        parts = [init_params(self.net, seed, prefix="net.")]
        if self.n_flows:
            parts.append(init_flow_params(self.dim, self.n_flows, seed))
        return ParameterSet.merge(parts)

    def head(self, pvars: Mapping[str, Var], tape: Tape, n: int) -> GaussianHead:
        out = apply_mlp(pvars, self.net, tape.constant(self.state[None, :]), prefix="net.")
        rows = np.zeros((n, self.dim))
        mean = ops.columns(out, np.arange(self.dim)) + rows
        raw = ops.columns(out, np.arange(self.dim, 2 * self.dim)) + rows
        return GaussianHead.from_outputs(mean, raw)

    def flows(self, pvars: Mapping[str, Var]) -> list[RadialFlowParams]:
        return flow_layers(pvars, self.n_flows)

    def sample(self, pvars: Mapping[str, Var], eps: np.ndarray) -> SquashedSample:
        """Reparameterized draws, one per row of ``eps``."""
        tape = next(iter(pvars.values())).tape
        head = self.head(pvars, tape, eps.shape[0])
        sample, _ = flow_stack_sample(head, self.flows(pvars), eps, self.bounds, self.squash)
        return sample

    def log_prob(self, pvars: Mapping[str, Var], points: np.ndarray) -> Var:
        """Log-density of given points, differentiable in the parameters."""
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        tape = next(iter(pvars.values())).tape
        head = self.head(pvars, tape, points.shape[0])
        return continuous_log_prob(head, self.flows(pvars), points, self.bounds, self.squash)

    def draw(self, params: ParameterSet, n: int, rng: np.random.Generator) -> np.ndarray:
        tape = Tape()
        return self.sample(tape.watch(params), rng.standard_normal((n, self.dim))).action.value

    def density(self, params: ParameterSet, points: np.ndarray) -> np.ndarray:
        tape = Tape()
        return np.exp(self.log_prob(tape.watch(params), points).value)
