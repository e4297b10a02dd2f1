from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from ..numgrad import ops
from ..numgrad.tape import Tape, Var
from .spec import HybridActionSpec


@dataclass(frozen=True)
class CategoricalHead:
    logits: Var

    @property
    def cardinality(self) -> int:
        return self.logits.shape[-1]

    def probs(self) -> Var:
        return ops.softmax(self.logits)

    def log_probs(self) -> Var:
        return ops.log_softmax(self.logits)

    def sample(self, uniforms: np.ndarray) -> np.ndarray:
        """Inverse-CDF draw per row from the given uniforms in [0, 1)."""
        cdf = np.cumsum(self.probs().value, axis=-1)
        picks = (np.asarray(uniforms)[:, None] >= cdf).sum(axis=-1)
        return np.minimum(picks, self.cardinality - 1)


def categorical_entropy(head: CategoricalHead) -> Var:
    return -ops.sum(head.probs() * head.log_probs(), axis=-1)


def joint_log_probs(spec: HybridActionSpec, heads: Sequence[CategoricalHead], tape: Tape, batch: int) -> Var:
    """``(batch, joint K)`` log-probabilities of every joint discrete action.

    Independent components add; with no discrete component there is a single
    forced action with log-probability 0.
    """
    if not heads:
        return tape.constant(np.zeros((batch, 1)))
    if len(heads) == 1:
        return heads[0].log_probs()
    total = None
    for i, head in enumerate(heads):
        part = ops.columns(head.log_probs(), spec.component_columns(i))
        total = part if total is None else total + part
    return total
