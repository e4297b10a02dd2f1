"""Randomized gradient checks over every differentiable building block.

Cases rotate through dense networks, squashed Gaussian heads, radial flow
stacks and the inverse-flow log-density of fixed actions. Each case draws
its own sizes and values from the suite seed, so a failing case can be
rebuilt from its index alone.
"""
from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np

from .numgrad import ops
from .numgrad.gradcheck import GradCheckResult, check_gradients
from .numgrad.nets import MlpConfig, apply_mlp, init_params
from .numgrad.params import ParameterSet
from .numgrad.rng import make_rng
from .policykit.flows import RadialFlowParams, continuous_log_prob, flow_layers, flow_stack_sample
from .policykit.gaussian import GaussianHead, gaussian_sample
from .policykit.spec import Bounds

logger = logging.getLogger("hybrid-sac.numgrad")

CASE_KINDS = ("mlp", "squashed_gaussian", "flow_stack", "flow_inverse")


def _head_params(rng: np.random.Generator, n: int, dim: int) -> ParameterSet:
    return ParameterSet({
        "mean": rng.normal(0.0, 0.5, size=(n, dim)),
        "log_std": rng.uniform(-1.0, 0.0, size=(n, dim)),
    })


def _flow_params(rng: np.random.Generator, dim: int, n_flows: int) -> ParameterSet:
    params = ParameterSet()
    for i in range(n_flows):
        params.add(f"flow.{i}.z0", rng.normal(0.0, 1.0, size=dim))
        params.add(f"flow.{i}.x", rng.normal(0.0, 0.5, size=1))
        params.add(f"flow.{i}.y", rng.normal(0.0, 0.5, size=1))
    return params


def _head(pvars) -> GaussianHead:
    return GaussianHead.from_outputs(pvars["mean"], pvars["log_std"])


def _mlp_case(rng: np.random.Generator):
    cfg = MlpConfig(
        input_dim=int(rng.integers(1, 5)),
        output_dim=int(rng.integers(1, 4)),
        hidden_sizes=tuple(int(h) for h in rng.integers(2, 6, size=int(rng.integers(1, 3)))),
        activation=str(rng.choice(["relu", "tanh"])),
    )
    params = init_params(cfg, int(rng.integers(0, 2**31)))
    for name in params.names():
        if name.endswith(".b"):
            params[name] = rng.normal(0.0, 0.1, size=params[name].shape)
    x = rng.normal(size=(4, cfg.input_dim))
    proj = rng.normal(size=(4, cfg.output_dim))

    def fn(tape, pvars):
        return ops.sum(apply_mlp(pvars, cfg, tape.constant(x)) * proj)

    return f"mlp {cfg.activation} {cfg.input_dim}-{'-'.join(map(str, cfg.hidden_sizes))}-{cfg.output_dim}", params, fn


def _squashed_case(rng: np.random.Generator):
    dim = int(rng.integers(1, 4))
    params = _head_params(rng, 3, dim)
    eps = rng.standard_normal((3, dim))
    bounds = Bounds(-rng.uniform(0.5, 2.0, size=dim), rng.uniform(0.5, 2.0, size=dim))
    proj = rng.normal(size=(3, dim))

    def fn(tape, pvars):
        sample = gaussian_sample(_head(pvars), eps, bounds)
        return ops.sum(sample.log_prob) + ops.sum(sample.action * proj)

    return f"squashed gaussian dim {dim}", params, fn


def _flow_stack_case(rng: np.random.Generator):
    dim = int(rng.integers(1, 4))
    n_flows = int(rng.integers(1, 4))
    params = ParameterSet.merge([_head_params(rng, 3, dim), _flow_params(rng, dim, n_flows)])
    eps = rng.standard_normal((3, dim))
    squash = bool(rng.integers(0, 2))
    proj = rng.normal(size=(3, dim))

    def fn(tape, pvars):
        sample, _ = flow_stack_sample(_head(pvars), flow_layers(pvars, n_flows), eps, None, squash)
        return ops.sum(sample.log_prob) + ops.sum(sample.action * proj)

    return f"flow stack dim {dim} x{n_flows} squash={squash}", params, fn


def _flow_inverse_case(rng: np.random.Generator):
    dim = int(rng.integers(1, 4))
    n_flows = int(rng.integers(1, 4))
    params = ParameterSet.merge([_head_params(rng, 3, dim), _flow_params(rng, dim, n_flows)])
    actions = rng.uniform(-0.9, 0.9, size=(3, dim))

    def fn(tape, pvars):
        flows: list[RadialFlowParams] = flow_layers(pvars, n_flows)
        return ops.sum(continuous_log_prob(_head(pvars), flows, actions))

    return f"inverse flow density dim {dim} x{n_flows}", params, fn


_BUILDERS: dict[str, Callable] = {
    "mlp": _mlp_case,
    "squashed_gaussian": _squashed_case,
    "flow_stack": _flow_stack_case,
    "flow_inverse": _flow_inverse_case,
}


def gradcheck_suite(n_cases: int = 50, seed: int = 0, h: float = 1e-5) -> list[GradCheckResult]:
    results = []
    for i in range(n_cases):
        kind = CASE_KINDS[i % len(CASE_KINDS)]
        rng = make_rng(seed, "gradcheck", i)
        label, params, fn = _BUILDERS[kind](rng)
        result = check_gradients(fn, params, h=h, name=f"#{i} {label}")
        if not result.passed:
            logger.warning("gradient check failed for %s: rel %.3g abs %.3g", result.name, result.max_rel_error, result.max_abs_error)
        results.append(result)
    return results
