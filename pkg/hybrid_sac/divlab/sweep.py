"""Grids of fits over temperatures, objectives and policy kinds.

Every cell is independent and fully determined by the config and its own
coordinates, so cells can run in worker processes and the result matches a
serial run exactly.
"""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np

from ..errors import ConfigError, HybridSACError
from ..numgrad.rng import make_rng
from .analysis import DensityGrid, kde_density, mode_mass
from .config import MatchConfig
from .fit import fit, policy_for
from .objectives import ObjectiveKind

logger = logging.getLogger("hybrid-sac.divlab")

SWEEP_OBJECTIVES = (ObjectiveKind.FORWARD_KL, ObjectiveKind.REVERSE_KL)
FLOW_COUNTS = (0, 3)


@dataclass(frozen=True)
class SweepCell:
    objective: str
    n_flows: int
    alpha: float

    @property
    def label(self) -> str:
        return f"{self.objective}_flows{self.n_flows}_alpha{self.alpha!r}"


@dataclass(frozen=True)
class CellResult:
    cell: SweepCell
    masses: tuple[float, ...]
    final_loss: float
    # KDE of policy samples on the sweep grid; None for failed cells or non-planar targets
    density: np.ndarray | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class SweepResult:
    grid: DensityGrid
    cells: list[CellResult]
    target_density: np.ndarray | None = None

    @property
    def failures(self) -> list[CellResult]:
        return [c for c in self.cells if not c.ok]


def run_cell(config: MatchConfig, cell: SweepCell) -> CellResult:
    """Fit one policy and summarize it; failures come back as a result, not an exception."""
    target = config.target()
    cell_config = config.replace(objective=cell.objective, n_flows=cell.n_flows, alpha=cell.alpha)
    policy = policy_for(cell_config)
    try:
        fitted = fit(policy, target, cell_config)
        draw = partial(policy.draw, fitted.params)
        masses = mode_mass(draw, target, config.mode_samples, make_rng(config.seed, "mode-mass", cell.label))
        density = None
        if target.dim == 2:
            grid = DensityGrid.square(config.grid_limit, config.grid_points)
            samples = draw(config.kde_samples, make_rng(config.seed, "kde", cell.label))
            density = kde_density(samples, grid.points)
    except HybridSACError as exc:
        logger.warning("sweep cell %s failed: %s", cell.label, exc)
        nan = tuple(float("nan") for _ in range(target.n_modes))
        return CellResult(cell, nan, float("nan"), None, str(exc))
    return CellResult(cell, tuple(float(m) for m in masses), fitted.final_loss, density)


def run_cells(config: MatchConfig, cells: list[SweepCell], max_workers: int | None = None) -> SweepResult:
    workers = max_workers or config.max_workers
    logger.info("running %d divergence-matching cells on %d worker(s)", len(cells), workers)
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_cell, [config] * len(cells), cells))
    else:
        results = [run_cell(config, cell) for cell in cells]

    grid = DensityGrid.square(config.grid_limit, config.grid_points)
    target = config.target()
    target_density = np.exp(target.log_prob(grid.points)) if target.dim == 2 else None
    return SweepResult(grid, results, target_density)


def temperature_sweep(config: MatchConfig, alphas=None, max_workers: int | None = None) -> SweepResult:
    """Forward and reverse KL, Gaussian and 3-flow policies, at every temperature."""
    alphas = tuple(config.alphas if alphas is None else alphas)
    if not alphas or any(a <= 0.0 for a in alphas):
        raise ConfigError(f"sweep temperatures must be positive, got {alphas}", key="divlab.alphas")
    cells = [
        SweepCell(kind.value, flows, float(alpha))
        for alpha in alphas
        for kind in SWEEP_OBJECTIVES
        for flows in FLOW_COUNTS
    ]
    return run_cells(config, cells, max_workers)


def run_grid(config: MatchConfig, max_workers: int | None = None) -> SweepResult:
    """All four objectives with and without flows at the configured temperature."""
    cells = [SweepCell(kind.value, flows, config.alpha) for kind in ObjectiveKind for flows in FLOW_COUNTS]
    return run_cells(config, cells, max_workers)
