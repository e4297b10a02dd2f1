"""Command implementations: every artifact the CLI produces is written here."""
from __future__ import annotations

import csv
import logging
from collections.abc import Iterator, Mapping, Sequence
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from jinja2 import Environment, FileSystemLoader, select_autoescape
from scipy import signal

from .agent import HybridSAC, Trainer, evaluate_agent, metrics_columns
from .config import RunConfig
from .diagnostics import gradcheck_suite
from .divlab import SweepResult, run_grid, temperature_sweep
from .envs import make_env
from .errors import ConfigError, HybridSACError, TrainingError
from .numgrad.gradcheck import GradCheckResult
from .numgrad.rng import stream_seed
from .state import add_event, get_health_snapshot, get_runs, increment_counter, record_run
from .utils.normalize import normalize_name
from .utils.numbers import format_number, parse_number
from .utils.validation import first_non_finite

logger = logging.getLogger("hybrid-sac.service")

templates = Environment(
    loader=FileSystemLoader(str(Path(__file__).resolve().parent / "templates")),
    autoescape=select_autoescape(),
    keep_trailing_newline=True,
)

Z_95 = 1.96


def seed_dir(out: str | Path, seed: int) -> Path:
    return Path(out) / f"seed_{seed}"


def digest_line(digest: str, seed: Any) -> str:
    return f"# config_digest={digest} seed={seed}"


def _cell(value: Any) -> str:
    return value if isinstance(value, str) else format_number(value)


class CsvSink:
    """CSV file with the digest/seed comment line, written row by row."""

    def __init__(self, path: Path, header: Sequence[str], digest: str, seed: Any) -> None:
        self.path = Path(path)
        self.header = list(header)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "w", newline="", encoding="utf-8")
        self._fh.write(digest_line(digest, seed) + "\n")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(self.header)

    def write(self, row: Mapping[str, Any] | Sequence[Any]) -> None:
        values = [row[c] for c in self.header] if isinstance(row, Mapping) else list(row)
        self._writer.writerow([_cell(v) for v in values])
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "CsvSink":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def write_csv(path: Path, header: Sequence[str], rows, digest: str, seed: Any) -> Path:
    with CsvSink(path, header, digest, seed) as sink:
        for row in rows:
            sink.write(row)
    return Path(path)


def read_csv(path: Path) -> tuple[str | None, list[str], list[list[str]]]:
    """Comment line (if any), header and raw cells."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise ConfigError(f"{path} does not exist", key="export.metrics") from None
    comment = lines[0] if lines and lines[0].startswith("#") else None
    body = lines[1:] if comment is not None else lines
    rows = list(csv.reader(body))
    if not rows:
        raise ConfigError(f"{path} has no header row", key="export.metrics")
    return comment, rows[0], rows[1:]


def _run_id(command: str, digest: str, seed: Any) -> str:
    return f"{command}-{digest[:12]}-s{seed}"


@contextmanager
def _journaled(command: str, digest: str, seed: int | None) -> Iterator[str]:
    run_id = _run_id(command, digest, seed)
    record_run(run_id, command, digest, seed, "started")
    increment_counter("runs_started")
    add_event(f"{command} started for seed {seed} (config {digest[:12]})", "info")
    try:
        yield run_id
    except HybridSACError as exc:
        logger.exception("%s failed for seed %s", command, seed)
        record_run(run_id, command, digest, seed, "failed")
        increment_counter("runs_failed")
        add_event(f"{command} failed for seed {seed}: {exc}", "error")
        raise
    record_run(run_id, command, digest, seed, "finished")
    increment_counter("runs_finished")
    add_event(f"{command} finished for seed {seed}", "success")


# train


@dataclass(frozen=True)
class TrainOutcome:
    seed: int
    metrics_path: Path
    checkpoints: list[Path]
    rows: int
    final_return: float | None


def cmd_train(config: RunConfig, seed: int) -> TrainOutcome:
    digest = config.digest
    out_dir = seed_dir(config.out, seed)
    with _journaled("train", digest, seed):
        trainer = Trainer(config.env, config.agent, seed)
        metrics_path = out_dir / "metrics.csv"
        checkpoints: list[Path] = []
        meta = {"config_digest": digest, "seed": seed}

        with CsvSink(metrics_path, metrics_columns(trainer.agent), digest, seed) as sink:

            def on_row(row: dict[str, Any]) -> None:
                bad = first_non_finite(row)
                if bad is not None:
                    raise TrainingError(f"metrics column '{bad}' is not finite", step=trainer.agent.update_count)
                sink.write(row)
                add_event(f"seed {seed} step {row['step']}: eval return {row['episode_return_mean']:.4f}", "info")

            def on_checkpoint(step: int) -> None:
                path = trainer.agent.save(out_dir / f"checkpoint_{step:09d}.hsac", {**meta, "env_steps": step})
                checkpoints.append(path)
                increment_counter("checkpoints")
                add_event(f"checkpoint written for seed {seed} at step {step}", "info")

            rows = trainer.run(config.agent.total_steps, on_row, on_checkpoint)

        checkpoints.append(trainer.agent.save(out_dir / "checkpoint_final.hsac", {**meta, "env_steps": trainer.env_steps}))
        increment_counter("checkpoints")
    final = rows[-1]["episode_return_mean"] if rows else None
    return TrainOutcome(seed, metrics_path, checkpoints, len(rows), final)


# eval


@dataclass(frozen=True)
class EvalSummary:
    checkpoint: str
    env: str
    seeds: tuple[int, ...]
    returns: list[float] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.returns)

    @property
    def mean(self) -> float:
        return float(np.mean(self.returns))

    @property
    def half_width(self) -> float:
        """Normal-approximation 95% half width; zero for a single return."""
        if self.n < 2:
            return 0.0
        return float(Z_95 * np.std(self.returns, ddof=1) / np.sqrt(self.n))

    @property
    def interval(self) -> tuple[float, float]:
        return self.mean - self.half_width, self.mean + self.half_width


def cmd_eval(
    config: RunConfig,
    checkpoint: str | Path | None = None,
    episodes: int | None = None,
    env_name: str | None = None,
    out: str | Path | None = None,
) -> tuple[EvalSummary, str]:
    """Deterministic returns of a checkpoint across seeds; returns the summary and its report."""
    path = checkpoint or config.eval.checkpoint
    if path is None:
        raise ConfigError("no checkpoint given", key="eval.checkpoint")
    episodes = episodes or config.eval.episodes
    digest = config.digest
    seeds_label = ",".join(str(s) for s in config.seeds)

    with _journaled("eval", digest, config.seeds[0]):
        agent = HybridSAC.load(path)
        if env_name is not None and normalize_name(env_name) != agent.env_name:
            raise ConfigError(f"checkpoint was trained on '{agent.env_name}', not '{env_name}'", key="env")
        returns: list[float] = []
        for seed in config.seeds:
            env = make_env(agent.env_name, stream_seed(seed, "eval-env"))
            returns.extend(evaluate_agent(agent, env, episodes, seed))
        summary = EvalSummary(str(path), agent.env_name, config.seeds, returns)
        if out is not None:
            low, high = summary.interval
            write_csv(
                Path(out) / "eval_summary.csv",
                ["env", "episodes", "mean_return", "ci_low", "ci_high"],
                [[summary.env, summary.n, summary.mean, low, high]],
                digest,
                seeds_label,
            )

    low, high = summary.interval
    report = templates.get_template("eval_summary.j2").render(
        checkpoint=summary.checkpoint,
        env=summary.env,
        seeds=summary.seeds,
        n=summary.n,
        mean=summary.mean,
        low=low,
        high=high,
        digest=digest,
    )
    return summary, report


# divlab


def mode_columns(n_modes: int) -> list[str]:
    return ["objective", "flows", "alpha", *(f"mode{i + 1}_mass" for i in range(n_modes))]


def write_divlab_outputs(result: SweepResult, out_dir: Path, digest: str, seed: int) -> list[Path]:
    n_modes = len(result.cells[0].masses) if result.cells else 0
    rows = [[c.cell.objective, c.cell.n_flows, c.cell.alpha, *c.masses] for c in result.cells]
    paths = [write_csv(out_dir / "modes.csv", mode_columns(n_modes), rows, digest, seed)]

    pts = result.grid.points
    grids = [(f"density_{c.cell.label}.csv", c.density) for c in result.cells if c.density is not None]
    if result.target_density is not None:
        grids.append(("density_target.csv", result.target_density))
    for name, density in grids:
        rows = ([x, y, d] for (x, y), d in zip(pts, density))
        paths.append(write_csv(out_dir / name, ["x", "y", "density"], rows, digest, seed))
    return paths


def cmd_divlab(config: RunConfig, seed: int, max_workers: int | None = None) -> tuple[SweepResult, str]:
    """One sweep or grid for ``seed``; cells fan out over ``max_workers`` processes."""
    digest = config.digest
    match = config.divlab.replace(seed=seed)
    with _journaled("divlab", digest, seed):
        if match.experiment == "grid":
            result = run_grid(match, max_workers)
        else:
            result = temperature_sweep(match, max_workers=max_workers)
        for failed in result.failures:
            increment_counter("sweep_failures")
            add_event(f"divlab cell {failed.cell.label} failed for seed {seed}: {failed.error}", "warning")
        write_divlab_outputs(result, seed_dir(config.out, seed), digest, seed)
    report = templates.get_template("divlab_summary.j2").render(experiment=match.experiment, seed=seed, cells=result.cells)
    return result, report


# gradcheck


def cmd_gradcheck(n_cases: int = 50, seed: int = 0) -> tuple[list[GradCheckResult], str]:
    results = gradcheck_suite(n_cases, seed)
    passed = sum(r.passed for r in results)
    if passed < len(results):
        add_event(f"gradient check: {len(results) - passed} of {len(results)} cases failed", "error")
    else:
        add_event(f"gradient check: all {len(results)} cases passed", "success")
    report = templates.get_template("gradcheck_report.j2").render(results=results, passed=passed, seed=seed)
    return results, report


# export


def cmd_export(
    metrics: str | Path,
    out: str | Path | None = None,
    smoothing: bool = True,
    window: int = 7,
    polyorder: int = 3,
) -> Path:
    """Plot-ready copy of a metrics CSV, Savitzky-Golay smoothed column by column.

    The ``step`` column is copied verbatim. Tables shorter than the window are
    copied unsmoothed.
    """
    metrics = Path(metrics)
    comment, header, raw = read_csv(metrics)
    if "step" not in header:
        raise ConfigError(f"{metrics} has no 'step' column", key="export.metrics")
    try:
        columns = {name: np.array([parse_number(r[i]) for r in raw]) for i, name in enumerate(header) if name != "step"}
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{metrics} holds a malformed row: {exc}", key="export.metrics") from None
    if smoothing and len(raw) >= window:
        columns = {name: signal.savgol_filter(values, window, polyorder) for name, values in columns.items()}

    target = Path(out) if out is not None else metrics.parent
    path = target / f"{metrics.stem}_smoothed.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    step_index = header.index("step")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment is not None:
            fh.write(comment + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i, row in enumerate(raw):
            writer.writerow([row[step_index] if name == "step" else format_number(columns[name][i]) for name in header])
    logger.info("exported %s (%d rows, smoothing=%s)", path, len(raw), smoothing)
    return path


# status


def cmd_status(limit: int = 10) -> str:
    return templates.get_template("status.j2").render(snapshot=get_health_snapshot(), runs=get_runs(limit))
