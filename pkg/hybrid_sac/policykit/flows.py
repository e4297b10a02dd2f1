"""Radial normalizing flows stacked on a Gaussian head.

A radial layer moves points along rays from its centre ``z0``:

    f(z) = z + beta * (z - z0) / (alpha + r),   r = |z - z0|

with ``alpha = exp(x)`` and ``beta = exp(y) - alpha``, so ``beta > -alpha``
and the map is invertible. Its Jacobian determinant is

    (1 + h - beta * r / (alpha + r)^2) * (1 + h)^(d - 1),   h = beta / (alpha + r).

Layers are stored in a ParameterSet as ``{prefix}{i}.z0``, ``{prefix}{i}.x``
and ``{prefix}{i}.y``.
"""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from ..numgrad import ops
from ..numgrad.params import ParameterSet
from ..numgrad.rng import make_rng
from ..numgrad.tape import Tape, Var
from .gaussian import GaussianHead, SquashedSample, _check_noise, gaussian_log_density_at, squash, unsquash
from .spec import Bounds

INIT_CENTER_STD = 0.01


@dataclass(frozen=True)
class RadialFlowParams:
    z0: Var
    x: Var
    y: Var

    @classmethod
    def from_vars(cls, pvars: Mapping[str, Var], prefix: str) -> "RadialFlowParams":
        return cls(pvars[f"{prefix}z0"], pvars[f"{prefix}x"], pvars[f"{prefix}y"])

    @classmethod
    def constant(cls, tape: Tape, z0, x: float, y: float) -> "RadialFlowParams":
        return cls(tape.constant(np.atleast_1d(z0)), tape.constant([x]), tape.constant([y]))

    @property
    def dim(self) -> int:
        return self.z0.shape[0]

    @property
    def alpha(self) -> Var:
        return ops.exp(self.x)

    @property
    def beta(self) -> Var:
        return ops.exp(self.y) - self.alpha


@dataclass(frozen=True)
class FlowTrace:
    points: list[Var]
    log_dets: list[Var]

    @property
    def pre_squash(self) -> Var:
        return self.points[-1]

    @property
    def total_log_det(self) -> Var | float:
        if not self.log_dets:
            return 0.0
        total = self.log_dets[0]
        for ld in self.log_dets[1:]:
            total = total + ld
        return total


def init_flow_params(dim: int, n_flows: int, seed: int, prefix: str = "flow.") -> ParameterSet:
    """Identity flows (x = y = 0) with centres jittered around the origin."""
    rng = make_rng(seed, "flow-init", prefix)
    params = ParameterSet()
    for i in range(n_flows):
        params.add(f"{prefix}{i}.z0", rng.normal(0.0, INIT_CENTER_STD, size=dim))
        params.add(f"{prefix}{i}.x", np.zeros(1))
        params.add(f"{prefix}{i}.y", np.zeros(1))
    return params


def flow_layers(pvars: Mapping[str, Var], n_flows: int, prefix: str = "flow.") -> list[RadialFlowParams]:
    return [RadialFlowParams.from_vars(pvars, f"{prefix}{i}.") for i in range(n_flows)]


def _as_rows(z: Var) -> tuple[Var, bool]:
    if z.ndim == 1:
        return ops.reshape(z, (1, z.shape[0])), True
    return z, False


def radial_flow_forward(params: RadialFlowParams, z: Var) -> tuple[Var, Var]:
    """Apply one radial layer to rows of ``z``; returns ``(f(z), log|det|)``."""
    z, single = _as_rows(z)
    if z.shape[-1] != params.dim:
        raise ContractError(f"flow of dim {params.dim} applied to points of dim {z.shape[-1]}")
    alpha, beta = params.alpha, params.beta
    diff = z - params.z0
    r = ops.norm(diff, axis=-1, keepdims=True)
    denom = alpha + r
    h = beta / denom
    out = z + h * diff
    radial = 1.0 + h - beta * r / (denom * denom)
    log_det = ops.log(radial) + (params.dim - 1) * ops.log(1.0 + h)
    log_det = ops.reshape(log_det, (z.shape[0],))
    if single:
        return ops.reshape(out, (params.dim,)), ops.reshape(log_det, ())
    return out, log_det


def radial_flow_inverse(params: RadialFlowParams, y: Var) -> Var:
    """Closed-form inverse of one radial layer.

    The pre-image radius solves ``r^2 + (alpha + beta - r_y) r - alpha r_y = 0``
    where ``r_y = |y - z0|``; the direction is unchanged.
    """
    y, single = _as_rows(y)
    if y.shape[-1] != params.dim:
        raise ContractError(f"flow of dim {params.dim} applied to points of dim {y.shape[-1]}")
    alpha, beta = params.alpha, params.beta
    diff = y - params.z0
    r_y = ops.norm(diff, axis=-1, keepdims=True)
    b = alpha + beta - r_y
    r = 0.5 * (ops.sqrt(b * b + 4.0 * alpha * r_y) - b)
    # y - z0 = (1 + beta / (alpha + r)) (z - z0)
    z = params.z0 + diff / (1.0 + beta / (alpha + r))
    if single:
        return ops.reshape(z, (params.dim,))
    return z


def flow_stack_sample(
    head: GaussianHead,
    flows: Sequence[RadialFlowParams],
    eps,
    bounds: Bounds | None = None,
    squash_output: bool = True,
) -> tuple[SquashedSample, FlowTrace]:
    """Push ``mean + eps * std`` through the flow stack, then squash."""
    eps = _check_noise(head, eps)
    w = head.mean + head.std() * eps
    base = ops.gaussian_log_density(head.mean.tape.constant(eps), head.log_std)
    points, log_dets = [w], []
    for layer in flows:
        w, log_det = radial_flow_forward(layer, w)
        points.append(w)
        log_dets.append(log_det)
        base = base - log_det
    action, log_prob = squash(w, base, bounds, squash_output)
    return SquashedSample(eps, w, action, log_prob, base), FlowTrace(points, log_dets)


def flow_log_density(head: GaussianHead, flows: Sequence[RadialFlowParams], w) -> Var:
    """Pre-squash log-density of given points ``w`` under head plus flows."""
    tape = head.mean.tape
    point = w if isinstance(w, Var) else tape.constant(w)
    pre_images = []
    for layer in reversed(flows):
        point = radial_flow_inverse(layer, point)
        pre_images.append(point)
    pre_images.reverse()
    log_prob = gaussian_log_density_at(head, pre_images[0] if pre_images else point)
    for layer, z in zip(flows, pre_images):
        _, log_det = radial_flow_forward(layer, z)
        log_prob = log_prob - log_det
    return log_prob


def continuous_log_prob(
    head: GaussianHead,
    flows: Sequence[RadialFlowParams],
    action,
    bounds: Bounds | None = None,
    squash_output: bool = True,
) -> Var:
    """Log-density of externally supplied actions, differentiable in the policy parameters."""
    action = np.asarray(action, dtype=np.float64)
    if action.ndim == 1:
        action = np.broadcast_to(action, head.mean.shape)
    if action.shape != head.mean.shape:
        raise ContractError(f"action has shape {action.shape}, head expects {head.mean.shape}")
    w, correction = unsquash(action, bounds, squash_output)
    return flow_log_density(head, flows, w) - correction
