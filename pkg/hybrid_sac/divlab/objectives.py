"""Monte Carlo divergence estimates between the match policy and a tempered target.

Each estimate is a tape scalar whose gradient is the objective's gradient
with respect to the policy parameters. Terms that do not depend on the
parameters (the target's normalizer and entropy) are added back as
constants, so that a policy equal to the target estimates to zero.
"""
from __future__ import annotations

import enum
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from ..errors import ObjectiveError
from ..numgrad import ops
from ..numgrad.tape import Var
from .policy import MatchPolicy
from .target import TemperedTarget, effective_sample_size

LOG_2 = float(np.log(2.0))


class ObjectiveKind(str, enum.Enum):
    FORWARD_KL = "forward_kl"
    REVERSE_KL = "reverse_kl"
    JENSEN_SHANNON = "jensen_shannon"
    LINEAR_SWITCH = "linear_switch"


@dataclass(frozen=True)
class ObjectiveDraws:
    """Randomness for one estimate: policy noise plus weighted target points."""

    policy_noise: np.ndarray
    target_points: np.ndarray
    target_weights: np.ndarray

    @classmethod
    def draw(cls, target: TemperedTarget, batch: int, rng: np.random.Generator) -> "ObjectiveDraws":
        # Both halves are always drawn so the stream does not depend on the objective.
        noise = rng.standard_normal((batch, target.base.dim))
        points, weights = target.sample(batch, rng)
        return cls(noise, points, weights)

    @property
    def batch(self) -> int:
        return self.policy_noise.shape[0]


@dataclass(frozen=True)
class ObjectiveEstimate:
    value: Var
    stderr: float
    # effective size of the target sample; the policy sample size for forward KL
    ess: float

    @property
    def estimate(self) -> float:
        return float(self.value.value)


def _stderr(terms: np.ndarray) -> float:
    if terms.shape[0] < 2:
        return 0.0
    return float(np.std(terms, ddof=1) / np.sqrt(terms.shape[0]))


def _weighted_stderr(terms: np.ndarray, weights: np.ndarray, center: float) -> float:
    return float(np.sqrt(np.sum(weights**2 * (terms - center) ** 2)))


def forward_kl(policy: MatchPolicy, pvars: Mapping[str, Var], target: TemperedTarget, draws: ObjectiveDraws) -> ObjectiveEstimate:
    """``E[log pi(a) - log p(a) / alpha] + log Z`` over reparameterized policy samples."""
    sample = policy.sample(pvars, draws.policy_noise)
    terms = sample.log_prob - target.unnormalized_log_prob_var(sample.action)
    value = ops.mean(terms) + target.log_partition
    return ObjectiveEstimate(value, _stderr(terms.value), float(draws.batch))


def reverse_kl(policy: MatchPolicy, pvars: Mapping[str, Var], target: TemperedTarget, draws: ObjectiveDraws) -> ObjectiveEstimate:
    """``E_target[log p_alpha(x) - log pi(x)]`` under self-normalized weights."""
    w = draws.target_weights
    terms = target.log_prob(draws.target_points) - policy.log_prob(pvars, draws.target_points)
    value = ops.sum(terms * w)
    stderr = _weighted_stderr(terms.value, w, float(value.value))
    return ObjectiveEstimate(value, stderr, effective_sample_size(w))


def jensen_shannon(policy: MatchPolicy, pvars: Mapping[str, Var], target: TemperedTarget, draws: ObjectiveDraws) -> ObjectiveEstimate:
    """Half the KL of each distribution to their average, one sample from each side."""
    sample = policy.sample(pvars, draws.policy_noise)
    log_p_own = target.unnormalized_log_prob_var(sample.action) - target.log_partition
    own = sample.log_prob - (ops.logaddexp(sample.log_prob, log_p_own) - LOG_2)

    w = draws.target_weights
    log_p_other = target.log_prob(draws.target_points)
    log_pi_other = policy.log_prob(pvars, draws.target_points)
    other = log_p_other - (ops.logaddexp(log_pi_other, log_p_other) - LOG_2)

    own_mean = ops.mean(own)
    other_mean = ops.sum(other * w)
    value = 0.5 * (own_mean + other_mean)
    var_own = _stderr(own.value) ** 2
    var_other = _weighted_stderr(other.value, w, float(other_mean.value)) ** 2
    return ObjectiveEstimate(value, 0.5 * float(np.sqrt(var_own + var_other)), effective_sample_size(w))


def estimate_objective(
    policy: MatchPolicy,
    pvars: Mapping[str, Var],
    target: TemperedTarget,
    kind: ObjectiveKind | str,
    draws: ObjectiveDraws,
    progress: float = 0.0,
) -> ObjectiveEstimate:
    """Estimate ``kind`` from ``draws``.

    ``progress`` is the fraction of training done and only matters for the
    linear switch, which weighs forward KL by ``1 - progress`` and reverse
    KL by ``progress``. At either end only the active objective is computed.
    """
    kind = ObjectiveKind(kind)
    if kind is ObjectiveKind.LINEAR_SWITCH:
        lam = float(np.clip(progress, 0.0, 1.0))
        if lam == 0.0:
            est = forward_kl(policy, pvars, target, draws)
        elif lam == 1.0:
            est = reverse_kl(policy, pvars, target, draws)
        else:
            fwd = forward_kl(policy, pvars, target, draws)
            rev = reverse_kl(policy, pvars, target, draws)
            value = (1.0 - lam) * fwd.value + lam * rev.value
            stderr = float(np.hypot((1.0 - lam) * fwd.stderr, lam * rev.stderr))
            est = ObjectiveEstimate(value, stderr, rev.ess)
    elif kind is ObjectiveKind.FORWARD_KL:
        est = forward_kl(policy, pvars, target, draws)
    elif kind is ObjectiveKind.REVERSE_KL:
        est = reverse_kl(policy, pvars, target, draws)
    else:
        est = jensen_shannon(policy, pvars, target, draws)

    if not np.isfinite(est.estimate):
        raise ObjectiveError(f"{kind.value} estimate is not finite ({est.estimate})")
    return est
