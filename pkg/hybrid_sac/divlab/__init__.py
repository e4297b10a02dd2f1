"""Fitting Gaussian and flow policies to a fixed mixture under several divergences."""
from .analysis import DensityGrid, kde_density, mode_mass, scott_bandwidth
from .config import DEFAULT_ALPHAS, MatchConfig
from .fit import FitResult, fit, policy_for
from .objectives import ObjectiveDraws, ObjectiveEstimate, ObjectiveKind, estimate_objective
from .policy import MatchPolicy, fixed_state
from .sweep import CellResult, SweepCell, SweepResult, run_cell, run_grid, temperature_sweep
from .target import GaussianMixtureTarget, TemperedTarget, effective_sample_size

__all__ = [
    "DEFAULT_ALPHAS",
    "CellResult",
    "DensityGrid",
    "FitResult",
    "GaussianMixtureTarget",
    "MatchConfig",
    "MatchPolicy",
    "ObjectiveDraws",
    "ObjectiveEstimate",
    "ObjectiveKind",
    "SweepCell",
    "SweepResult",
    "TemperedTarget",
    "effective_sample_size",
    "estimate_objective",
    "fit",
    "fixed_state",
    "kde_density",
    "mode_mass",
    "policy_for",
    "run_cell",
    "run_grid",
    "scott_bandwidth",
    "temperature_sweep",
]
