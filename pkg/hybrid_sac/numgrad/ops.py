"""Differentiable primitives recorded on a :class:`~hybrid_sac.numgrad.tape.Tape`.

Every function accepts :class:`Var` operands or plain numbers/arrays (lifted
to constants on the operand's tape) and returns a new :class:`Var`.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import special

from ..errors import ContractError
from .tape import Tape, Var

LOG_2PI = float(np.log(2.0 * np.pi))


def _tape_of(*operands) -> Tape:
    tape = None
    for x in operands:
        if isinstance(x, Var):
            if tape is None:
                tape = x.tape
            elif x.tape is not tape:
                raise ContractError("operands belong to different tapes")
    if tape is None:
        raise ContractError("at least one operand must be a Var")
    return tape


def _lift(x, tape: Tape) -> Var:
    return x if isinstance(x, Var) else tape.constant(x)


def _binary(op, a, b, forward, backward) -> Var:
    tape = _tape_of(a, b)
    return tape.apply(op, (_lift(a, tape), _lift(b, tape)), forward, backward)


def _unary(op, x: Var, forward, backward) -> Var:
    return x.tape.apply(op, (x,), forward, backward)


def _expand(g, x_ndim: int, axis, keepdims: bool):
    if axis is None or keepdims:
        return g
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    axes = tuple(a % x_ndim for a in axes)
    for a in sorted(axes):
        g = np.expand_dims(g, a)
    return g


# elementwise arithmetic

def add(a, b) -> Var:
    return _binary("add", a, b, np.add, lambda g, out, x, y: (g, g))


def sub(a, b) -> Var:
    return _binary("sub", a, b, np.subtract, lambda g, out, x, y: (g, -g))


def mul(a, b) -> Var:
    return _binary("mul", a, b, np.multiply, lambda g, out, x, y: (g * y, g * x))


def div(a, b) -> Var:
    return _binary("div", a, b, np.divide, lambda g, out, x, y: (g / y, -g * x / (y * y)))


def neg(x: Var) -> Var:
    return _unary("neg", x, np.negative, lambda g, out, a: (-g,))


def square(x: Var) -> Var:
    return _unary("square", x, np.square, lambda g, out, a: (2.0 * a * g,))


def sqrt(x: Var) -> Var:
    return _unary("sqrt", x, np.sqrt, lambda g, out, a: (g / (2.0 * out),))


def minimum(a, b) -> Var:
    def bwd(g, out, x, y):
        take_x = x <= y
        return g * take_x, g * ~take_x

    return _binary("minimum", a, b, np.minimum, bwd)


# nonlinearities

def exp(x: Var) -> Var:
    return _unary("exp", x, np.exp, lambda g, out, a: (g * out,))


def log(x: Var) -> Var:
    return _unary("log", x, np.log, lambda g, out, a: (g / a,))


def tanh(x: Var) -> Var:
    return _unary("tanh", x, np.tanh, lambda g, out, a: (g * (1.0 - out * out),))


def relu(x: Var) -> Var:
    return _unary("relu", x, lambda a: np.maximum(a, 0.0), lambda g, out, a: (g * (a > 0.0),))


def softplus(x: Var) -> Var:
    return _unary("softplus", x, lambda a: np.logaddexp(0.0, a), lambda g, out, a: (g * special.expit(a),))


def clip(x: Var, low: float, high: float) -> Var:
    def bwd(g, out, a):
        return (g * ((a >= low) & (a <= high)),)

    return _unary("clip", x, lambda a: np.clip(a, low, high), bwd)


def activation(x: Var, name: str) -> Var:
    if name == "relu":
        return relu(x)
    if name == "tanh":
        return tanh(x)
    raise ContractError(f"unknown activation '{name}'")


# linear algebra

def matmul(x: Var, w: Var) -> Var:
    return _binary("matmul", x, w, np.matmul, lambda g, out, a, b: (g @ b.T, a.T @ g))


def dense(x: Var, w: Var, b: Var) -> Var:
    tape = _tape_of(x, w, b)

    def fwd(a, weight, bias):
        return a @ weight + bias

    def bwd(g, out, a, weight, bias):
        return g @ weight.T, a.T @ g, g.sum(axis=0)

    return tape.apply("dense", (x, w, b), fwd, bwd)


# reductions

def sum(x: Var, axis=None, keepdims: bool = False) -> Var:  # noqa: A001
    def bwd(g, out, a):
        return (np.broadcast_to(_expand(g, a.ndim, axis, keepdims), a.shape),)

    return _unary("sum", x, lambda a: np.sum(a, axis=axis, keepdims=keepdims), bwd)


def mean(x: Var, axis=None, keepdims: bool = False) -> Var:
    count = x.value.size if axis is None else int(np.prod([x.shape[a] for a in np.atleast_1d(axis)]))
    return sum(x, axis=axis, keepdims=keepdims) / float(count)


def norm(x: Var, axis: int = -1, keepdims: bool = False) -> Var:
    def fwd(a):
        return np.sqrt(np.sum(a * a, axis=axis, keepdims=keepdims))

    def bwd(g, out, a):
        g_e = _expand(g, a.ndim, axis, keepdims)
        o_e = _expand(out, a.ndim, axis, keepdims)
        safe = np.where(o_e > 0.0, o_e, 1.0)
        return (np.where(o_e > 0.0, g_e * a / safe, 0.0),)

    return _unary("norm", x, fwd, bwd)


def logsumexp(x: Var, axis: int = -1, keepdims: bool = False) -> Var:
    def bwd(g, out, a):
        g_e = _expand(g, a.ndim, axis, keepdims)
        o_e = _expand(out, a.ndim, axis, keepdims)
        return (g_e * np.exp(a - o_e),)

    return _unary("logsumexp", x, lambda a: special.logsumexp(a, axis=axis, keepdims=keepdims), bwd)


def logaddexp(a, b) -> Var:
    def bwd(g, out, x, y):
        return g * np.exp(x - out), g * np.exp(y - out)

    return _binary("logaddexp", a, b, np.logaddexp, bwd)


def softmax(x: Var, axis: int = -1) -> Var:
    def fwd(a):
        z = np.exp(a - np.max(a, axis=axis, keepdims=True))
        return z / np.sum(z, axis=axis, keepdims=True)

    def bwd(g, out, a):
        return (out * (g - np.sum(g * out, axis=axis, keepdims=True)),)

    return _unary("softmax", x, fwd, bwd)


def log_softmax(x: Var, axis: int = -1) -> Var:
    def fwd(a):
        shifted = a - np.max(a, axis=axis, keepdims=True)
        return shifted - np.log(np.sum(np.exp(shifted), axis=axis, keepdims=True))

    def bwd(g, out, a):
        return (g - np.exp(out) * np.sum(g, axis=axis, keepdims=True),)

    return _unary("log_softmax", x, fwd, bwd)


# shape and indexing

def concat(xs: Sequence[Var], axis: int = -1) -> Var:
    if len(xs) == 1:
        return xs[0]
    tape = _tape_of(*xs)
    parts = [_lift(x, tape) for x in xs]
    sizes = [p.shape[axis] for p in parts]
    splits = np.cumsum(sizes)[:-1]

    def fwd(*arrays):
        return np.concatenate(arrays, axis=axis)

    def bwd(g, out, *arrays):
        return tuple(np.split(g, splits, axis=axis))

    return tape.apply("concat", parts, fwd, bwd)


def reshape(x: Var, shape: tuple[int, ...]) -> Var:
    return _unary("reshape", x, lambda a: np.reshape(a, shape), lambda g, out, a: (np.reshape(g, a.shape),))


def columns(x: Var, cols) -> Var:
    """``x[:, cols]`` for a 2-D operand; repeated columns are allowed."""
    cols = np.asarray(cols, dtype=np.intp)

    def bwd(g, out, a):
        full = np.zeros_like(a)
        np.add.at(full, (slice(None), cols), g)
        return (full,)

    return _unary("columns", x, lambda a: a[:, cols], bwd)


def pick(x: Var, index) -> Var:
    """Per-row gather ``x[i, index[i]]`` of a 2-D operand."""
    index = np.asarray(index, dtype=np.intp)
    rows = np.arange(index.shape[0])

    def bwd(g, out, a):
        full = np.zeros_like(a)
        full[rows, index] = g
        return (full,)

    return _unary("pick", x, lambda a: a[rows, index], bwd)


def stop_gradient(x: Var) -> Var:
    return x.tape.constant(x.value)


def gaussian_log_density(z: Var, log_std: Var) -> Var:
    """Log N(z * std; 0, std) summed over the last axis, given standardized ``z``."""
    per_dim = -0.5 * square(z) - log_std - 0.5 * LOG_2PI
    return sum(per_dim, axis=-1)


def where(condition, a, b) -> Var:
    cond = np.asarray(condition, dtype=bool)

    def bwd(g, out, x, y):
        return g * cond, g * ~cond

    return _binary("where", a, b, lambda x, y: np.where(cond, x, y), bwd)
