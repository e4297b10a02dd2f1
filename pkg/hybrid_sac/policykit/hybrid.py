"""Factored hybrid policy: discrete heads times continuous heads.

Under ``independent`` binding every continuous component is always active.
Under ``per_discrete_action`` binding there is one continuous component per
discrete choice and only the selected one enters the density.
"""
from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from ..numgrad import ops
from ..numgrad.tape import Var
from .categorical import CategoricalHead, categorical_entropy
from .flows import RadialFlowParams, continuous_log_prob
from .gaussian import GaussianHead, SquashedSample, gaussian_entropy
from .spec import Bounds, HybridAction, HybridActionSpec


@dataclass(frozen=True)
class HybridHeads:
    discrete: tuple[CategoricalHead, ...] = ()
    continuous: tuple[GaussianHead, ...] = ()
    flows: tuple[tuple[RadialFlowParams, ...], ...] = ()
    bounds: tuple[Bounds | None, ...] = ()
    squash: bool = True

    def __post_init__(self) -> None:
        if not self.flows:
            object.__setattr__(self, "flows", tuple(() for _ in self.continuous))
        if not self.bounds:
            object.__setattr__(self, "bounds", tuple(None for _ in self.continuous))

    @property
    def any_var(self) -> Var:
        heads = [h.logits for h in self.discrete] + [h.mean for h in self.continuous]
        if not heads:
            raise ContractError("policy has no heads")
        return heads[0]

    @property
    def batch(self) -> int:
        return self.any_var.shape[0]

    def check(self, spec: HybridActionSpec) -> None:
        cards = tuple(h.cardinality for h in self.discrete)
        dims = tuple(h.dim for h in self.continuous)
        if cards != spec.discrete or dims != spec.continuous:
            raise ContractError(f"heads {cards}/{dims} do not match action spec {spec.discrete}/{spec.continuous}")


def stack_columns(parts: Sequence[Var]) -> Var:
    """Stack ``(n,)`` variables into an ``(n, len(parts))`` matrix."""
    return ops.concat([ops.reshape(p, (p.shape[0], 1)) for p in parts], axis=-1)


def _as_batch(actions, batch: int) -> list[HybridAction]:
    if isinstance(actions, HybridAction):
        return [actions] * batch
    actions = list(actions)
    if len(actions) != batch:
        raise ContractError(f"{len(actions)} actions supplied for a batch of {batch}")
    return actions


def component_log_probs(spec: HybridActionSpec, heads: HybridHeads, actions: Sequence[HybridAction]) -> list[Var]:
    """Per continuous component, the ``(n,)`` log-density of the supplied values."""
    out = []
    for j, head in enumerate(heads.continuous):
        values = np.stack([a.continuous[j] for a in actions])
        out.append(continuous_log_prob(head, heads.flows[j], values, heads.bounds[j], heads.squash))
    return out


def hybrid_log_prob(spec: HybridActionSpec, heads: HybridHeads, actions) -> Var:
    """Log-density of hybrid actions, one value per batch row."""
    heads.check(spec)
    actions = _as_batch(actions, heads.batch)
    for action in actions:
        spec.validate(action)

    tape = heads.any_var.tape
    total: Var = tape.constant(np.zeros(heads.batch))
    for i, head in enumerate(heads.discrete):
        chosen = [a.discrete[i] for a in actions]
        total = total + ops.pick(head.log_probs(), chosen)

    per_component = component_log_probs(spec, heads, actions)
    if spec.per_discrete and per_component:
        chosen = [a.discrete[0] for a in actions]
        total = total + ops.pick(stack_columns(per_component), chosen)
    else:
        for lp in per_component:
            total = total + lp
    return total


def continuous_entropies(heads: HybridHeads, samples: Sequence[SquashedSample] | None = None) -> list[Var]:
    """Pre-squash entropy per continuous component.

    Closed form for plain Gaussians; with flows the single-sample estimate
    ``-log q(w)`` of the matching entry in ``samples``.
    """
    out = []
    for j, head in enumerate(heads.continuous):
        if heads.flows[j]:
            if samples is None:
                raise ContractError("flow entropies need a sample per continuous component")
            out.append(-samples[j].base_log_prob)
        else:
            out.append(gaussian_entropy(head))
    return out


def hybrid_entropy_bonus(
    spec: HybridActionSpec,
    heads: HybridHeads,
    alpha_d: float,
    alpha_c: float,
    samples: Sequence[SquashedSample] | None = None,
) -> Var:
    """``alpha_d * H(discrete) + alpha_c * sum_k pi(k) H(continuous | k)`` per row.

    Several discrete components contribute the sum of their entropies. Under
    independent binding the continuous entropy does not depend on the
    discrete choice, so the weights sum out.
    """
    heads.check(spec)
    tape = heads.any_var.tape
    discrete = tape.constant(np.zeros(heads.batch))
    for head in heads.discrete:
        discrete = discrete + categorical_entropy(head)

    continuous = tape.constant(np.zeros(heads.batch))
    entropies = continuous_entropies(heads, samples)
    if spec.per_discrete and entropies:
        weights = heads.discrete[0].probs()
        continuous = ops.sum(weights * stack_columns(entropies), axis=-1)
    else:
        for h in entropies:
            continuous = continuous + h
    return alpha_d * discrete + alpha_c * continuous
