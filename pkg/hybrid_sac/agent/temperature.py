from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numgrad import ops
from ..numgrad.adam import AdamState, adam_step
from ..numgrad.params import ParameterSet
from ..numgrad.tape import Tape, backward
from ..policykit.spec import HybridActionSpec


@dataclass
class TemperatureState:
    """Log-parameterized temperatures for the discrete and continuous entropy terms."""

    params: ParameterSet
    optimizer: AdamState
    target_entropy_d: float
    target_entropy_c: float

    @classmethod
    def create(cls, init_alpha: float, target_entropy_d: float, target_entropy_c: float, learning_rate: float) -> "TemperatureState":
        log_alpha = np.log(init_alpha)
        params = ParameterSet({"log_alpha_d": np.array([log_alpha]), "log_alpha_c": np.array([log_alpha])})
        return cls(params, AdamState.for_params(params, learning_rate), target_entropy_d, target_entropy_c)

    @property
    def alpha_d(self) -> float:
        return float(np.exp(self.params["log_alpha_d"][0]))

    @property
    def alpha_c(self) -> float:
        return float(np.exp(self.params["log_alpha_c"][0]))


def default_target_entropies(spec: HybridActionSpec) -> tuple[float, float]:
    """0.5 ln K per discrete component; minus the active continuous dims.

    Under per-discrete binding only one parameter vector is active at a time,
    so the continuous target is minus the average component size.
    """
    target_d = float(sum(0.5 * np.log(k) for k in spec.discrete))
    if not spec.continuous:
        return target_d, 0.0
    if spec.per_discrete:
        return target_d, -float(np.mean(spec.continuous))
    return target_d, -float(spec.continuous_dim)


def temperature_update(
    temps: TemperatureState,
    entropy_d: float,
    entropy_c: float,
    tune_d: bool = True,
    tune_c: bool = True,
) -> dict[str, float]:
    """One Adam step on ``alpha * (H - H_target)`` with respect to each log-alpha.

    A temperature whose entropy sits on its target gets a zero gradient and
    stays put; an entropy below target raises the temperature.
    """
    gap_d = entropy_d - temps.target_entropy_d if tune_d else 0.0
    gap_c = entropy_c - temps.target_entropy_c if tune_c else 0.0
    tape = Tape()
    pvars = tape.watch(temps.params)
    loss = ops.exp(pvars["log_alpha_d"]) * gap_d + ops.exp(pvars["log_alpha_c"]) * gap_c
    grads = backward(ops.sum(loss), wrt=pvars)
    adam_step(temps.optimizer, temps.params, grads)
    return {"alpha_d": temps.alpha_d, "alpha_c": temps.alpha_c}
