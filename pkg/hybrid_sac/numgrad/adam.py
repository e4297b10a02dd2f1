from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError, TrainingError
from .params import ParameterSet


@dataclass
class AdamState:
    learning_rate: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def for_params(cls, params: ParameterSet, learning_rate: float = 3e-4, **kwargs) -> "AdamState":
        return cls(
            learning_rate=learning_rate,
            first_moment=params.zeros_like(),
            second_moment=params.zeros_like(),
            **kwargs,
        )

    def copy(self) -> "AdamState":
        return AdamState(
            learning_rate=self.learning_rate,
            beta1=self.beta1,
            beta2=self.beta2,
            epsilon=self.epsilon,
            step_count=self.step_count,
            first_moment={k: v.copy() for k, v in self.first_moment.items()},
            second_moment={k: v.copy() for k, v in self.second_moment.items()},
        )


def adam_step(state: AdamState, params: ParameterSet, grads: Mapping[str, np.ndarray]) -> None:
    """One bias-corrected Adam update, applied to ``params`` in place.

    Entries whose gradient is exactly zero keep their value; their moments
    still decay.
    """
    if not params.congruent(grads):
        raise ContractError("gradients are not congruent with the parameter set")
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient for '{name}'", step=state.step_count + 1)

    state.step_count += 1
    t = state.step_count
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for name in params:
        g = grads[name]
        m = state.first_moment.setdefault(name, np.zeros_like(g))
        v = state.second_moment.setdefault(name, np.zeros_like(g))
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        m_hat = m / bc1
        v_hat = v / bc2
        update = state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)
        # exactly-zero gradient means the entry is frozen: value kept, moments still decay
        params.entries[name] = np.where(g != 0.0, params.entries[name] - update, params.entries[name])
