"""The four update rules and target smoothing.

Every function takes its exploration noise explicitly (one standard normal
array per continuous component) so an update is a pure function of
parameters, batch and noise.

The logged continuous entropy is the single-sample ``-log pi`` of the
squashed action (after tanh and any flows), weighted by the discrete
probabilities; it is the quantity the continuous temperature is tuned on.
"""
from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np
from scipy import special

from ..errors import TrainingError
from ..numgrad import ops
from ..numgrad.adam import AdamState, adam_step
from ..numgrad.params import ParameterSet
from ..numgrad.tape import Tape, Var, backward
from ..policykit.categorical import categorical_entropy, joint_log_probs
from ..policykit.flows import flow_stack_sample
from ..policykit.gaussian import SquashedSample
from ..policykit.hybrid import HybridHeads, stack_columns
from .networks import ActorNet, CriticNet, flat_continuous
from .replay import Batch

CRITICS = ("q1", "q2")


@dataclass(frozen=True)
class PolicyEval:
    heads: HybridHeads
    samples: list[SquashedSample]
    continuous: Var | None
    # (batch, joint K); log_probs_c is (batch, 1) when every discrete action
    # shares the same continuous sample, None without continuous components
    log_probs_d: Var
    log_probs_c: Var | None

    def entropy_d(self) -> Var:
        tape = self.log_probs_d.tape
        total = tape.constant(np.zeros(self.log_probs_d.shape[0]))
        for head in self.heads.discrete:
            total = total + categorical_entropy(head)
        return total


def evaluate_policy(actor: ActorNet, pvars: Mapping[str, Var], obs: Var, noise: Sequence[np.ndarray]) -> PolicyEval:
    """Heads, one reparameterized continuous sample per component, and log-probabilities."""
    heads = actor.heads(pvars, obs)
    samples = [
        flow_stack_sample(head, heads.flows[j], noise[j], heads.bounds[j], heads.squash)[0]
        for j, head in enumerate(heads.continuous)
    ]
    log_d = joint_log_probs(actor.spec, heads.discrete, obs.tape, obs.shape[0])
    if not samples:
        log_c = None
    elif actor.spec.per_discrete:
        log_c = stack_columns([s.log_prob for s in samples])
    else:
        total = samples[0].log_prob
        for s in samples[1:]:
            total = total + s.log_prob
        log_c = ops.reshape(total, (total.shape[0], 1))
    return PolicyEval(heads, samples, flat_continuous([s.action for s in samples]), log_d, log_c)


def _critic_continuous(tape: Tape, batch_continuous: np.ndarray) -> Var | None:
    return tape.constant(batch_continuous) if batch_continuous.shape[-1] else None


def critic_target(
    batch: Batch,
    actor: ActorNet,
    actor_params: ParameterSet,
    critic: CriticNet,
    target_params: Mapping[str, ParameterSet],
    alpha_d: float,
    alpha_c: float,
    gamma: float,
    noise: Sequence[np.ndarray],
) -> np.ndarray:
    """Soft bootstrap target per transition.

    ``r + gamma (1 - done) [sum_k pi(k) (min Q(s', k, a') - alpha_c log pi(a' | k)) + alpha_d H(pi_d)]``
    with the discrete expectation taken exactly.
    """
    tape = Tape()
    pvars = tape.watch(actor_params)
    obs = tape.constant(batch.next_obs)
    ev = evaluate_policy(actor, pvars, obs, noise)
    q = [critic.q_values(tape.watch(target_params[name]), obs, ev.continuous, name) for name in CRITICS]
    q_min = ops.minimum(q[0], q[1])
    inner = q_min if ev.log_probs_c is None else q_min - alpha_c * ev.log_probs_c
    value = ops.sum(ops.exp(ev.log_probs_d) * inner, axis=-1) + alpha_d * ev.entropy_d()
    return batch.reward + gamma * (1.0 - batch.done) * value.value


def critic_loss(
    critic: CriticNet, params: ParameterSet, name: str, batch: Batch, targets: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean squared error of the taken action's Q-value; other outputs get no gradient."""
    tape = Tape()
    pvars = tape.watch(params)
    q = critic.q_values(pvars, tape.constant(batch.obs), _critic_continuous(tape, batch.continuous), name)
    taken = ops.pick(q, batch.joint_indices(critic.spec))
    loss = ops.mean(ops.square(taken - targets))
    return float(loss.value), backward(loss, wrt=pvars)


def _checked(value: float, grads: Mapping[str, np.ndarray], what: str, step: int | None) -> None:
    if not np.isfinite(value):
        raise TrainingError(f"{what} is not finite ({value})", step=step)
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"{what} gradient for '{name}' is not finite", step=step)


def critic_update(
    batch: Batch,
    critic: CriticNet,
    params: Mapping[str, ParameterSet],
    optimizers: Mapping[str, AdamState],
    targets: np.ndarray,
    step: int | None = None,
) -> dict[str, float]:
    """Regress both critics on the same targets; returns ``q1_loss`` and ``q2_loss``."""
    losses = {}
    for name in CRITICS:
        loss, grads = critic_loss(critic, params[name], name, batch, targets)
        _checked(loss, grads, f"{name} loss", step)
        adam_step(optimizers[name], params[name], grads)
        losses[f"{name}_loss"] = loss
    return losses


def discrete_policy_loss(log_probs_d: Var, q: np.ndarray, alpha_d: float) -> Var:
    """``alpha_d * KL(pi_d || softmax(q / alpha_d))`` averaged over the batch, exact over K."""
    log_target = special.log_softmax(q / alpha_d, axis=-1)
    kl = ops.sum(ops.exp(log_probs_d) * (log_probs_d - log_target), axis=-1)
    return alpha_d * ops.mean(kl)


def continuous_policy_loss(log_probs_c: Var, q: Var, weights: np.ndarray, alpha_c: float) -> Var:
    """SAC actor loss per discrete action, averaged with constant weights ``pi(k)``."""
    per_action = alpha_c * log_probs_c - q
    return ops.mean(ops.sum(weights * per_action, axis=-1))


@dataclass(frozen=True)
class ActorStep:
    loss_d: float
    loss_c: float
    grads: dict[str, np.ndarray]
    entropy_d: float
    entropy_c: float
    # conditional continuous entropy estimate per joint discrete action
    entropy_c_per_action: np.ndarray


def actor_losses(
    batch: Batch,
    actor: ActorNet,
    actor_params: ParameterSet,
    critic: CriticNet,
    critic_params: Mapping[str, ParameterSet],
    alpha_d: float,
    alpha_c: float,
    noise: Sequence[np.ndarray],
) -> ActorStep:
    """Discrete and continuous actor losses sharing one set of samples.

    Discrete: ``alpha_d * KL(pi_d || softmax(q / alpha_d))`` with q the
    critic minimum at the sampled continuous actions, held constant.
    Continuous: ``sum_k pi(k) (alpha_c log pi(a | k) - q_k)`` with the
    weights held constant and the gradient taken through the samples.
    """
    tape = Tape()
    pvars = tape.watch(actor_params)
    obs = tape.constant(batch.obs)
    ev = evaluate_policy(actor, pvars, obs, noise)
    q = [critic.q_values(tape.watch(critic_params[name], prefix=f"{name}:"), obs, ev.continuous, name) for name in CRITICS]
    q_min = ops.minimum(q[0], q[1])

    loss_d = discrete_policy_loss(ev.log_probs_d, q_min.value, alpha_d)

    weights = np.exp(ev.log_probs_d.value)
    entropy_d = float(np.mean(ev.entropy_d().value))
    if ev.log_probs_c is None:
        total = loss_d
        loss_c = 0.0
        entropy_c = 0.0
        per_action = np.zeros(0)
    else:
        loss_c_var = continuous_policy_loss(ev.log_probs_c, q_min, weights, alpha_c)
        total = loss_d + loss_c_var
        loss_c = float(loss_c_var.value)
        neg_log = -np.broadcast_to(ev.log_probs_c.value, weights.shape)
        entropy_c = float(np.mean(np.sum(weights * neg_log, axis=-1)))
        per_action = np.mean(neg_log, axis=0)

    grads = backward(total, wrt=pvars)
    return ActorStep(float(loss_d.value), loss_c, grads, entropy_d, entropy_c, per_action)


def actor_update(
    step_result: ActorStep, params: ParameterSet, optimizer: AdamState, step: int | None = None
) -> None:
    _checked(step_result.loss_d + step_result.loss_c, step_result.grads, "actor loss", step)
    adam_step(optimizer, params, step_result.grads)


def polyak_update(online: ParameterSet, target: ParameterSet, tau: float) -> None:
    """``target <- (1 - tau) target + tau online`` elementwise, in place."""
    for name, value in online.items():
        target[name] = (1.0 - tau) * target[name] + tau * value
