"""Gaussian-mixture target and its tempered versions.

The tempered target at temperature alpha is proportional to p(x)^(1/alpha).
Its normalizer has no closed form for alpha != 1, so it is computed once by
trapezoid quadrature on a grid wide enough to hold the broadened modes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import integrate, special

from ..errors import ConfigError
from ..numgrad import ops
from ..numgrad.tape import Var
from ..policykit.hybrid import stack_columns

QUADRATURE_POINTS = 401
QUADRATURE_SPAN = 8.0


@dataclass(frozen=True)
class GaussianMixtureTarget:
    weights: tuple[float, ...]
    means: tuple[tuple[float, ...], ...]
    # one isotropic std per component, or one std per component and dim
    stds: tuple = ()

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        mu = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        sd = np.asarray(self.stds, dtype=np.float64)
        if sd.ndim < 2:
            sd = np.broadcast_to(sd.reshape(-1, 1), mu.shape)
        if w.ndim != 1 or len(w) != mu.shape[0] or sd.shape != mu.shape:
            raise ConfigError("mixture weights, means and stds disagree in shape", key="divlab.target")
        if np.any(w <= 0.0) or abs(w.sum() - 1.0) > 1e-9:
            raise ConfigError(f"mixture weights must be positive and sum to 1, got {tuple(w)}", key="divlab.target.weights")
        if np.any(sd <= 0.0):
            raise ConfigError("mixture stds must be positive", key="divlab.target.stds")
        object.__setattr__(self, "weights", tuple(float(x) for x in w))
        object.__setattr__(self, "means", tuple(tuple(float(x) for x in row) for row in mu))
        object.__setattr__(self, "stds", tuple(tuple(float(x) for x in row) for row in sd))

    @classmethod
    def default(cls) -> "GaussianMixtureTarget":
        """Two equal, well separated isotropic modes in the plane."""
        return cls(weights=(0.5, 0.5), means=((-2.0, -2.0), (2.0, 2.0)), stds=(0.5, 0.5))

    @property
    def dim(self) -> int:
        return len(self.means[0])

    @property
    def n_modes(self) -> int:
        return len(self.weights)

    @property
    def mean_array(self) -> np.ndarray:
        return np.asarray(self.means)

    @property
    def std_array(self) -> np.ndarray:
        return np.asarray(self.stds)

    def component_log_probs(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        z = (x[:, None, :] - self.mean_array[None]) / self.std_array[None]
        per_dim = -0.5 * z * z - np.log(self.std_array)[None] - 0.5 * ops.LOG_2PI
        return np.log(self.weights)[None] + per_dim.sum(axis=-1)

    def log_prob(self, x: np.ndarray) -> np.ndarray:
        return special.logsumexp(self.component_log_probs(x), axis=-1)

    def log_prob_var(self, x: Var) -> Var:
        """Differentiable log-density of rows of ``x``."""
        parts = []
        for w, mu, sd in zip(self.weights, self.mean_array, self.std_array):
            z = (x - mu) / sd
            log_std = x.tape.constant(np.log(sd))
            parts.append(ops.gaussian_log_density(z, log_std) + float(np.log(w)))
        if len(parts) == 1:
            return parts[0]
        return ops.logsumexp(stack_columns(parts), axis=-1)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Exact draws: pick a component, then its Gaussian."""
        comp = rng.choice(self.n_modes, size=n, p=np.asarray(self.weights))
        noise = rng.standard_normal((n, self.dim))
        return self.mean_array[comp] + self.std_array[comp] * noise

    def nearest_mode(self, x: np.ndarray) -> np.ndarray:
        d2 = ((np.atleast_2d(x)[:, None, :] - self.mean_array[None]) ** 2).sum(axis=-1)
        return np.argmin(d2, axis=-1)

    def tempered(self, alpha: float) -> "TemperedTarget":
        return TemperedTarget(self, float(alpha))


def quadrature_grid(target: GaussianMixtureTarget, alpha: float, points: int = QUADRATURE_POINTS) -> list[np.ndarray]:
    spread = QUADRATURE_SPAN * target.std_array.max(axis=0) * np.sqrt(max(alpha, 1.0))
    lo = target.mean_array.min(axis=0) - spread
    hi = target.mean_array.max(axis=0) + spread
    return [np.linspace(a, b, points) for a, b in zip(lo, hi)]


@dataclass(frozen=True)
class TemperedTarget:
    base: GaussianMixtureTarget
    alpha: float
    points: int = field(default=QUADRATURE_POINTS, compare=False)

    def __post_init__(self) -> None:
        if self.alpha <= 0.0:
            raise ConfigError(f"temperature must be positive, got {self.alpha}", key="divlab.alpha")

    @cached_property
    def log_partition(self) -> float:
        """log of the integral of p(x)^(1/alpha), by trapezoid quadrature (dims 1 and 2)."""
        axes = quadrature_grid(self.base, self.alpha, self.points)
        if len(axes) == 1:
            values = np.exp(self.base.log_prob(axes[0][:, None]) / self.alpha)
            return float(np.log(integrate.trapezoid(values, axes[0])))
        if len(axes) == 2:
            xx, yy = np.meshgrid(axes[0], axes[1], indexing="ij")
            pts = np.column_stack([xx.ravel(), yy.ravel()])
            values = np.exp(self.base.log_prob(pts) / self.alpha).reshape(xx.shape)
            inner = integrate.trapezoid(values, axes[1], axis=1)
            return float(np.log(integrate.trapezoid(inner, axes[0])))
        raise ConfigError(f"tempered targets are limited to 1 or 2 dims, got {len(axes)}", key="divlab.target")

    def log_prob(self, x: np.ndarray) -> np.ndarray:
        return self.base.log_prob(x) / self.alpha - self.log_partition

    def unnormalized_log_prob_var(self, x: Var) -> Var:
        return self.base.log_prob_var(x) / self.alpha

    def sample(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Draws with self-normalized weights.

        At alpha = 1 the draws are exact and the weights uniform. Otherwise
        the untempered mixture is the proposal and the weights correct for
        the tempering.
        """
        x = self.base.sample(n, rng)
        if self.alpha == 1.0:
            return x, np.full(n, 1.0 / n)
        log_w = self.base.log_prob(x) * (1.0 / self.alpha - 1.0)
        return x, np.exp(log_w - special.logsumexp(log_w))


def effective_sample_size(weights: np.ndarray) -> float:
    w = np.asarray(weights, dtype=np.float64)
    return float(w.sum() ** 2 / np.sum(w * w))
