from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import ObjectiveError
from ..numgrad.adam import AdamState, adam_step
from ..numgrad.params import ParameterSet
from ..numgrad.rng import make_rng
from ..numgrad.tape import Tape, backward
from .config import MatchConfig
from .objectives import ObjectiveDraws, ObjectiveKind, estimate_objective
from .policy import MatchPolicy
from .target import GaussianMixtureTarget

logger = logging.getLogger("hybrid-sac.divlab")

LOG_EVERY = 1000


@dataclass
class FitResult:
    policy: MatchPolicy
    params: ParameterSet
    trace: list[float] = field(default_factory=list)
    stderr: list[float] = field(default_factory=list)
    ess: list[float] = field(default_factory=list)

    @property
    def final_loss(self) -> float:
        return self.trace[-1] if self.trace else float("nan")


def policy_for(config: MatchConfig, n_flows: int | None = None) -> MatchPolicy:
    return MatchPolicy(
        dim=config.target().dim,
        state_dim=config.state_dim,
        hidden_sizes=config.hidden_sizes,
        activation=config.activation,
        n_flows=config.n_flows if n_flows is None else n_flows,
        squash=config.squash,
    )


def switch_progress(step: int, steps: int) -> float:
    """Fraction of training done, 0 at the first step and 1 at the last."""
    return step / (steps - 1) if steps > 1 else 0.0


def fit(
    policy: MatchPolicy,
    target: GaussianMixtureTarget,
    config: MatchConfig,
    params: ParameterSet | None = None,
) -> FitResult:
    """Run ``config.steps`` Adam steps on the configured objective.

    A non-finite estimate or gradient aborts the fit with
    :class:`ObjectiveError` carrying the loss trace so far.
    """
    kind = config.kind
    tempered = target.tempered(config.alpha)
    params = (params or policy.init(config.seed)).copy()
    optimizer = AdamState.for_params(params, config.learning_rate)
    rng = make_rng(config.seed, "divlab-fit", kind.value)
    result = FitResult(policy, params)

    for step in range(config.steps):
        draws = ObjectiveDraws.draw(tempered, config.batch_size, rng)
        tape = Tape()
        pvars = tape.watch(params)
        try:
            est = estimate_objective(policy, pvars, tempered, kind, draws, switch_progress(step, config.steps))
        except ObjectiveError as exc:
            raise ObjectiveError(f"step {step}: {exc}", trace=result.trace) from exc
        grads = backward(est.value, wrt=pvars)
        for name, g in grads.items():
            if not np.all(np.isfinite(g)):
                raise ObjectiveError(f"step {step}: gradient for '{name}' is not finite", trace=result.trace)
        adam_step(optimizer, params, grads)

        result.trace.append(est.estimate)
        result.stderr.append(est.stderr)
        result.ess.append(est.ess)
        if (step + 1) % LOG_EVERY == 0:
            logger.debug(
                "%s alpha=%g flows=%d step %d: loss %.5f ess %.1f",
                kind.value, config.alpha, policy.n_flows, step + 1, est.estimate, est.ess,
            )
    if kind in (ObjectiveKind.REVERSE_KL, ObjectiveKind.JENSEN_SHANNON) and result.ess:
        logger.info("%s alpha=%g: mean effective sample size %.1f of %d", kind.value, config.alpha, np.mean(result.ess), config.batch_size)
    return result
