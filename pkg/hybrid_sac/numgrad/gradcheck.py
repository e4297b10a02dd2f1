from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass

import numpy as np

from .params import ParameterSet
from .tape import Tape, Var, backward

ScalarFn = Callable[[Tape, Mapping[str, Var]], Var]

REL_TOL = 1e-4
ABS_TOL = 1e-6


@dataclass(frozen=True)
class GradCheckResult:
    name: str
    n_params: int
    max_rel_error: float
    max_abs_error: float
    passed: bool


def _evaluate(fn: ScalarFn, params: ParameterSet) -> float:
    tape = Tape()
    out = fn(tape, tape.watch(params))
    return float(np.sum(out.value))


def check_gradients(fn: ScalarFn, params: ParameterSet, h: float = 1e-5, name: str = "") -> GradCheckResult:
    """Compare reverse-mode gradients of ``fn`` with central differences.

    An entry passes when its relative error is below 1e-4 or its absolute
    error is below 1e-6.
    """
    tape = Tape()
    pvars = tape.watch(params)
    out = fn(tape, pvars)
    analytic = backward(out, wrt=pvars)

    probe = params.copy()
    worst_rel = 0.0
    worst_abs = 0.0
    passed = True
    for pname, arr in params.items():
        grad = analytic[pname].ravel()
        for k in range(arr.size):
            base = probe.entries[pname].ravel().copy()
            bumped = base.copy()
            bumped[k] = base[k] + h
            probe.entries[pname] = bumped.reshape(arr.shape)
            f_plus = _evaluate(fn, probe)
            bumped[k] = base[k] - h
            probe.entries[pname] = bumped.reshape(arr.shape)
            f_minus = _evaluate(fn, probe)
            probe.entries[pname] = base.reshape(arr.shape)

            numeric = (f_plus - f_minus) / (2.0 * h)
            abs_err = abs(grad[k] - numeric)
            scale = max(abs(grad[k]), abs(numeric))
            rel_err = abs_err / scale if scale > 0.0 else 0.0
            if rel_err >= REL_TOL and abs_err >= ABS_TOL:
                passed = False
            worst_abs = max(worst_abs, abs_err)
            worst_rel = max(worst_rel, rel_err if abs_err >= ABS_TOL else 0.0)
    return GradCheckResult(name, params.size, worst_rel, worst_abs, passed)
