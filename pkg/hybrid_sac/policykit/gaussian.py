"""Diagonal Gaussian heads with tanh squashing.

Everything here works on batches: means and log-stds are ``(n, m)`` tape
variables and log-probabilities come back as ``(n,)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from ..numgrad import ops
from ..numgrad.tape import Var
from .spec import Bounds

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
# atanh is evaluated at most this close to +-1.
_EDGE = 1.0 - 1e-12


@dataclass(frozen=True)
class GaussianHead:
    mean: Var
    log_std: Var

    @classmethod
    def from_outputs(cls, mean: Var, raw_log_std: Var) -> "GaussianHead":
        return cls(mean, ops.clip(raw_log_std, LOG_STD_MIN, LOG_STD_MAX))

    @property
    def dim(self) -> int:
        return self.mean.shape[-1]

    @property
    def batch(self) -> int:
        return self.mean.shape[0]

    def std(self) -> Var:
        return ops.exp(self.log_std)


@dataclass(frozen=True)
class SquashedSample:
    noise: np.ndarray
    pre_squash: Var
    action: Var
    log_prob: Var
    # Density of the pre-squash value; its negative is the entropy estimate.
    base_log_prob: Var


def tanh_log_det(w) -> Var | np.ndarray:
    """log(1 - tanh(w)^2) summed over the last axis, in the overflow-free form."""
    if isinstance(w, Var):
        return ops.sum(2.0 * (np.log(2.0) - w - ops.softplus(-2.0 * w)), axis=-1)
    return np.sum(2.0 * (np.log(2.0) - w - np.logaddexp(0.0, -2.0 * w)), axis=-1)


def _check_noise(head: GaussianHead, eps) -> np.ndarray:
    eps = np.asarray(eps, dtype=np.float64)
    if eps.ndim == 1:
        eps = np.broadcast_to(eps, head.mean.shape)
    if eps.shape != head.mean.shape:
        raise ContractError(f"noise has shape {eps.shape}, head expects {head.mean.shape}")
    return eps


def squash(pre_squash: Var, base_log_prob: Var, bounds: Bounds | None, squash: bool = True) -> tuple[Var, Var]:
    """Map a pre-squash value to an action and correct its log-density."""
    if not squash:
        return pre_squash, base_log_prob
    action = ops.tanh(pre_squash)
    log_prob = base_log_prob - tanh_log_det(pre_squash)
    if bounds is not None:
        action = action * bounds.scale + bounds.center
        log_prob = log_prob - bounds.log_jacobian
    return action, log_prob


def unsquash(action: np.ndarray, bounds: Bounds | None, squash: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Pre-squash value of a given action plus the log-density correction to subtract."""
    a = np.asarray(action, dtype=np.float64)
    if not squash:
        return a, np.zeros(a.shape[:-1])
    correction = np.zeros(a.shape[:-1])
    if bounds is not None:
        a = (a - bounds.center) / bounds.scale
        correction = correction + bounds.log_jacobian
    a = np.clip(a, -_EDGE, _EDGE)
    w = np.arctanh(a)
    return w, correction + tanh_log_det(w)


def gaussian_sample(head: GaussianHead, eps, bounds: Bounds | None = None, squash_output: bool = True) -> SquashedSample:
    """Reparameterized sample ``tanh(mean + eps * std)`` with its log-density."""
    eps = _check_noise(head, eps)
    w = head.mean + head.std() * eps
    base = ops.gaussian_log_density(head.mean.tape.constant(eps), head.log_std)
    action, log_prob = squash(w, base, bounds, squash_output)
    return SquashedSample(eps, w, action, log_prob, base)


def gaussian_log_density_at(head: GaussianHead, w) -> Var:
    """Log N(w; mean, std) summed over the last axis for a given pre-squash ``w``."""
    z = (w - head.mean) / head.std()
    return ops.gaussian_log_density(z, head.log_std)


def gaussian_entropy(head: GaussianHead) -> Var:
    """Differential entropy of the pre-squash density, one value per row."""
    return ops.sum(head.log_std + 0.5 * (1.0 + ops.LOG_2PI), axis=-1)


def deterministic_action(head: GaussianHead, bounds: Bounds | None = None, squash_output: bool = True) -> np.ndarray:
    mean = head.mean.value
    if not squash_output:
        return mean.copy()
    action = np.tanh(mean)
    if bounds is not None:
        action = action * bounds.scale + bounds.center
    return action
