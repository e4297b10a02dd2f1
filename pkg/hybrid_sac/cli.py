"""Command-line entry point: ``python run.py <command> [options]``."""
from __future__ import annotations

import argparse
import logging
import os
import sys
from collections.abc import Sequence

from . import service
from .agent.config import PRESETS
from .config import RunConfig, load_run_config
from .errors import ConfigError, HybridSACError
from .worker import run_seeds

logger = logging.getLogger("hybrid-sac.cli")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML run configuration")
    parser.add_argument("--seed", type=int, action="append", dest="seeds", help="seed to run (repeatable)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--preset", choices=sorted(PRESETS), help="agent hyperparameter preset")
    parser.add_argument("--workers", type=int, help="processes for the seed fan-out")


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hybrid-sac", description="Hybrid SAC training and divergence-matching experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train an agent and write metrics.csv plus checkpoints per seed")
    _add_run_options(train)

    ev = sub.add_parser("eval", help="deterministic evaluation of a checkpoint")
    _add_run_options(ev)
    ev.add_argument("--checkpoint", help="checkpoint file to evaluate")
    ev.add_argument("--episodes", type=int, help="episodes per seed")
    ev.add_argument("--env", dest="env_name", help="expected environment of the checkpoint")

    div = sub.add_parser("divlab", help="fit policies to the mixture target and write mode-mass and density tables")
    _add_run_options(div)

    grad = sub.add_parser("gradcheck", help="compare analytic and finite-difference gradients")
    grad.add_argument("--cases", type=int, default=50)
    grad.add_argument("--seed", type=int, default=0)

    exp = sub.add_parser("export", help="plot-ready, optionally smoothed copy of a metrics CSV")
    exp.add_argument("--config", help="YAML run configuration")
    exp.add_argument("--metrics", help="metrics CSV to export")
    exp.add_argument("--out", help="directory for the exported file (default: next to the input)")
    exp.add_argument("--no-smoothing", action="store_true")

    sub.add_parser("status", help="show the run journal")
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    return load_run_config(
        args.config,
        command=args.command,
        preset=getattr(args, "preset", None),
        seeds=tuple(args.seeds) if getattr(args, "seeds", None) else None,
        out=getattr(args, "out", None),
        workers=getattr(args, "workers", None),
    )


def _train(args: argparse.Namespace) -> int:
    config = _run_config(args)
    for outcome in run_seeds(service.cmd_train, config):
        final = "n/a" if outcome.final_return is None else f"{outcome.final_return:.4f}"
        print(f"seed {outcome.seed}: {outcome.rows} rows in {outcome.metrics_path}, final eval return {final}")
    return EXIT_OK


def _eval(args: argparse.Namespace) -> int:
    config = _run_config(args)
    _, report = service.cmd_eval(config, args.checkpoint, args.episodes, args.env_name, out=args.out)
    print(report, end="")
    return EXIT_OK


def _divlab(args: argparse.Namespace) -> int:
    config = _run_config(args)
    for _, report in run_seeds(service.cmd_divlab, config):
        print(report)
    return EXIT_OK


def _gradcheck(args: argparse.Namespace) -> int:
    results, report = service.cmd_gradcheck(args.cases, args.seed)
    print(report)
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


def _export(args: argparse.Namespace) -> int:
    config = load_run_config(args.config, command="export")
    settings = config.export
    metrics = args.metrics or settings.metrics
    if metrics is None:
        raise ConfigError("export needs --metrics or export.metrics in the config", key="export.metrics")
    smoothing = settings.smoothing and not args.no_smoothing
    path = service.cmd_export(metrics, args.out, smoothing, settings.window, settings.polyorder)
    print(path)
    return EXIT_OK


def _status(args: argparse.Namespace) -> int:
    print(service.cmd_status(), end="")
    return EXIT_OK


_HANDLERS = {
    "train": _train,
    "eval": _eval,
    "divlab": _divlab,
    "gradcheck": _gradcheck,
    "export": _export,
    "status": _status,
}


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("HSAC_LOG_LEVEL", "INFO").upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    args = build_arg_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except HybridSACError as exc:
        logger.debug("%s failed", args.command, exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
