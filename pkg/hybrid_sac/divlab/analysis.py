"""Summaries of fitted policies: mass per target mode and kernel density grids."""
from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from ..errors import ContractError
from ..numgrad.ops import LOG_2PI
from .target import GaussianMixtureTarget

MIN_BANDWIDTH = 1e-3
_CHUNK = 256

Sampler = Callable[[int, np.random.Generator], np.ndarray]


def mode_mass(draw: Sampler, target: GaussianMixtureTarget, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Fraction of ``n_samples`` draws lying nearest to each target mean."""
    samples = np.asarray(draw(n_samples, rng), dtype=np.float64)
    counts = np.bincount(target.nearest_mode(samples), minlength=target.n_modes)
    return counts / float(len(samples))


def scott_bandwidth(samples: np.ndarray) -> np.ndarray:
    """Per-dimension ``n^(-1/(d+4)) * std``, floored at MIN_BANDWIDTH."""
    n, d = samples.shape
    std = np.std(samples, axis=0, ddof=1)
    return np.maximum(n ** (-1.0 / (d + 4)) * std, MIN_BANDWIDTH)


def kde_density(samples: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Gaussian product-kernel density of ``samples`` at every grid point.

    Both arguments may be 1-D (scalar data) or ``(n, d)``.
    """
    samples = np.asarray(samples, dtype=np.float64)
    grid = np.asarray(grid, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[:, None]
    if grid.ndim == 1:
        grid = grid[:, None]
    if samples.shape[0] < 2:
        raise ContractError(f"kernel density needs at least 2 samples, got {samples.shape[0]}")
    if grid.shape[1] != samples.shape[1]:
        raise ContractError(f"grid has dim {grid.shape[1]}, samples have dim {samples.shape[1]}")

    h = scott_bandwidth(samples)
    log_norm = -np.sum(np.log(h)) - 0.5 * samples.shape[1] * LOG_2PI - np.log(samples.shape[0])
    out = np.empty(grid.shape[0])
    for start in range(0, grid.shape[0], _CHUNK):
        block = grid[start:start + _CHUNK]
        z = (block[:, None, :] - samples[None, :, :]) / h
        out[start:start + _CHUNK] = np.exp(special.logsumexp(-0.5 * np.sum(z * z, axis=-1), axis=1) + log_norm)
    return out


@dataclass(frozen=True)
class DensityGrid:
    xs: np.ndarray
    ys: np.ndarray

    @classmethod
    def square(cls, limit: float, points: int) -> "DensityGrid":
        axis = np.linspace(-limit, limit, points)
        return cls(axis, axis.copy())

    @property
    def points(self) -> np.ndarray:
        """All grid points, x-major, as ``(len(xs) * len(ys), 2)``."""
        xx, yy = np.meshgrid(self.xs, self.ys, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])

    def total_mass(self, density: np.ndarray) -> float:
        values = np.asarray(density).reshape(len(self.xs), len(self.ys))
        return float(integrate.trapezoid(integrate.trapezoid(values, self.ys, axis=1), self.xs))
