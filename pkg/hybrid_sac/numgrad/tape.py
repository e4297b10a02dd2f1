"""Recorded computations and reverse-mode gradients.

A :class:`Tape` is an append-only list of primitive applications. Each node
keeps the function that produced its value so the whole computation can be
replayed from its leaves, and a backward rule mapping the output cotangent to
one cotangent per input. Values are float64 numpy arrays; broadcasting is
allowed and undone on the way back.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Mapping, Sequence

import numpy as np

from ..errors import ContractError

if TYPE_CHECKING:
    from .params import ParameterSet

Array = np.ndarray
ForwardFn = Callable[..., Array]
BackwardFn = Callable[..., Sequence["Array | None"]]


@dataclass(frozen=True)
class Node:
    op: str
    inputs: tuple[int, ...]
    forward: ForwardFn | None = None
    backward: BackwardFn | None = None


class Var:
    """Handle on one node of a tape."""

    __slots__ = ("tape", "index")
    # numpy defers binary operators to the Var methods below.
    __array_ufunc__ = None

    def __init__(self, tape: "Tape", index: int) -> None:
        self.tape = tape
        self.index = index

    @property
    def value(self) -> Array:
        return self.tape.values[self.index]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    def __repr__(self) -> str:
        op = self.tape.nodes[self.index].op
        return f"Var(op={op!r}, shape={self.shape})"

    def __add__(self, other):
        from . import ops

        return ops.add(self, other)

    def __radd__(self, other):
        from . import ops

        return ops.add(other, self)

    def __sub__(self, other):
        from . import ops

        return ops.sub(self, other)

    def __rsub__(self, other):
        from . import ops

        return ops.sub(other, self)

    def __mul__(self, other):
        from . import ops

        return ops.mul(self, other)

    def __rmul__(self, other):
        from . import ops

        return ops.mul(other, self)

    def __truediv__(self, other):
        from . import ops

        return ops.div(self, other)

    def __rtruediv__(self, other):
        from . import ops

        return ops.div(other, self)

    def __neg__(self):
        from . import ops

        return ops.neg(self)


class Tape:
    def __init__(self) -> None:
        self.nodes: list[Node] = []
        self.values: list[Array] = []
        self.watched: dict[str, Var] = {}

    def __len__(self) -> int:
        return len(self.nodes)

    def leaf(self, value, op: str = "leaf") -> Var:
        # Copy so later in-place optimizer steps cannot alter recorded values.
        arr = np.array(value, dtype=np.float64)
        self.nodes.append(Node(op=op, inputs=()))
        self.values.append(arr)
        return Var(self, len(self.nodes) - 1)

    def constant(self, value) -> Var:
        return self.leaf(value, op="const")

    def watch(self, params: "ParameterSet", prefix: str = "") -> dict[str, Var]:
        pvars = {name: self.leaf(arr, op="param") for name, arr in params.items()}
        for name, var in pvars.items():
            self.watched[f"{prefix}{name}"] = var
        return pvars

    def apply(self, op: str, inputs: Sequence[Var], forward: ForwardFn, backward: BackwardFn) -> Var:
        for var in inputs:
            if var.tape is not self:
                raise ContractError(f"operand of '{op}' belongs to a different tape")
        value = np.asarray(forward(*(self.values[v.index] for v in inputs)), dtype=np.float64)
        self.nodes.append(Node(op=op, inputs=tuple(v.index for v in inputs), forward=forward, backward=backward))
        self.values.append(value)
        return Var(self, len(self.nodes) - 1)

    def replay(self) -> list[Array]:
        """Re-run every primitive from the recorded leaves."""
        replayed: list[Array] = []
        for node, recorded in zip(self.nodes, self.values):
            if node.forward is None:
                replayed.append(recorded.copy())
                continue
            out = node.forward(*(replayed[i] for i in node.inputs))
            replayed.append(np.asarray(out, dtype=np.float64))
        return replayed


def unbroadcast(grad: Array, shape: tuple[int, ...]) -> Array:
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def backward(output: Var, output_grad=None, wrt: Mapping[str, Var] | None = None) -> dict[str, Array]:
    """Gradient of ``sum(output * output_grad)`` with respect to ``wrt``.

    ``wrt`` defaults to every parameter watched on the tape. Leaves that the
    output does not depend on get an all-zero gradient.
    """
    tape = output.tape
    if output_grad is None:
        seed = np.ones_like(output.value)
    else:
        seed = np.asarray(output_grad, dtype=np.float64).reshape(output.value.shape)

    grads: list[Array | None] = [None] * (output.index + 1)
    grads[output.index] = seed
    for i in range(output.index, -1, -1):
        g = grads[i]
        node = tape.nodes[i]
        if g is None or node.backward is None:
            continue
        ins = [tape.values[j] for j in node.inputs]
        parts = node.backward(g, tape.values[i], *ins)
        for j, part in zip(node.inputs, parts):
            if part is None:
                continue
            part = unbroadcast(np.asarray(part, dtype=np.float64), tape.values[j].shape)
            grads[j] = part if grads[j] is None else grads[j] + part

    result: dict[str, Array] = {}
    if wrt is None:
        wrt = tape.watched
    for name, var in wrt.items():
        if var.tape is not tape:
            raise ContractError(f"gradient requested for '{name}' from a different tape")
        g = grads[var.index] if var.index <= output.index else None
        result[name] = np.zeros_like(var.value) if g is None else np.array(g)
    return result
