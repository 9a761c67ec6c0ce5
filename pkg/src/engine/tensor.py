"""Immutable float64 tensors and a reverse-mode gradient tape.

Usage:

    with GradTape() as tape:
        x = tape.watch(images)
        loss = loss_ce(logits_of(x), labels)
    (gx,) = grad(loss, [x])

Ops run outside a tape (or on tensors that do not require gradients) are
plain numpy computations and are not recorded.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from src.engine.errors import DisconnectedGraphError, ShapeMismatchError
from src.engine.primitives import get_primitive

logger = logging.getLogger("freqlens")

_local = threading.local()


class Tensor:
    """A read-only float64 array, optionally tracked for gradients."""

    __slots__ = ("data", "requires_grad", "_tape")

    def __init__(self, data: Any, requires_grad: bool = False):
        arr = np.array(data, dtype=np.float64)
        arr.flags.writeable = False
        self.data = arr
        self.requires_grad = requires_grad
        self._tape: GradTape | None = None

    @classmethod
    def _wrap(cls, arr: np.ndarray, requires_grad: bool) -> "Tensor":
        t = cls.__new__(cls)
        arr = np.asarray(arr, dtype=np.float64)
        arr.flags.writeable = False
        t.data = arr
        t.requires_grad = requires_grad
        t._tape = None
        return t

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.size == 1 else float("nan")

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}{flag})"

    # operator sugar, all routed through forward_op
    def __add__(self, other):
        return forward_op("add", [self, other])

    def __radd__(self, other):
        return forward_op("add", [other, self])

    def __sub__(self, other):
        return forward_op("sub", [self, other])

    def __rsub__(self, other):
        return forward_op("sub", [other, self])

    def __mul__(self, other):
        return forward_op("multiply", [self, other])

    def __rmul__(self, other):
        return forward_op("multiply", [other, self])

    def __neg__(self):
        return forward_op("multiply", [self, -1.0])

    def __matmul__(self, other):
        return forward_op("matmul", [self, other])

    def relu(self) -> "Tensor":
        return forward_op("relu", [self])

    def tanh(self) -> "Tensor":
        return forward_op("tanh", [self])

    def sum(self, axis: int | None = None) -> "Tensor":
        return forward_op("sum", [self], {"axis": axis})

    def mean(self, axis: int) -> "Tensor":
        return forward_op("mean_pool", [self], {"axis": axis})

    def reshape(self, *shape: int) -> "Tensor":
        return forward_op("reshape", [self], {"shape": shape})

    def transpose(self, *axes: int) -> "Tensor":
        return forward_op("transpose", [self], {"axes": axes})


def as_tensor(value: Any) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


@dataclass(frozen=True)
class TapeNode:
    op: str
    inputs: tuple[Tensor, ...]
    attrs: Mapping[str, Any]
    output: Tensor
    cache: Any


class GradTape:
    """Ordered record of the primitive ops that touched a watched tensor.

    A tape is single-threaded; disjoint tapes may be used from different
    threads at the same time (the active-tape stack is thread-local).
    """

    def __init__(self):
        self.nodes: list[TapeNode] = []

    def __enter__(self) -> "GradTape":
        _stack().append(self)
        return self

    def __exit__(self, *exc) -> None:
        stack = _stack()
        if stack and stack[-1] is self:
            stack.pop()

    def __len__(self) -> int:
        return len(self.nodes)

    @staticmethod
    def watch(value: Any) -> Tensor:
        """Return a fresh tensor holding `value` that requires gradients."""
        data = value.data if isinstance(value, Tensor) else value
        return Tensor(data, requires_grad=True)

    def record(self, node: TapeNode) -> None:
        self.nodes.append(node)
        node.output._tape = self

    def replay(self) -> list[np.ndarray]:
        """Recompute every recorded node from its recorded inputs."""
        return [get_primitive(n.op).forward([t.data for t in n.inputs], n.attrs)[0] for n in self.nodes]


def _stack() -> list[GradTape]:
    stack = getattr(_local, "stack", None)
    if stack is None:
        stack = _local.stack = []
    return stack


def active_tape() -> GradTape | None:
    stack = _stack()
    return stack[-1] if stack else None


def forward_op(op: str, inputs: Sequence[Any], attrs: Mapping[str, Any] | None = None) -> Tensor:
    """Run one primitive; record it when a tape is active and any input is watched."""
    prim = get_primitive(op)
    attrs = dict(attrs or {})
    tensors = tuple(as_tensor(x) for x in inputs)
    if len(tensors) != prim.arity:
        raise ShapeMismatchError(op, f"expected {prim.arity} inputs, got {len(tensors)}")

    out_data, cache = prim.forward([t.data for t in tensors], attrs)

    tape = active_tape()
    tracked = tape is not None and any(t.requires_grad for t in tensors)
    out = Tensor._wrap(out_data, requires_grad=tracked)
    if tracked:
        tape.record(TapeNode(op, tensors, attrs, out, cache))
    return out


def grad(loss: Tensor, wrt: Iterable[Tensor]) -> list[np.ndarray]:
    """Gradient of a scalar loss with respect to each tensor in `wrt`."""
    wrt = list(wrt)
    if loss.size != 1:
        raise ShapeMismatchError("grad", f"loss must be scalar, got shape {loss.shape}")
    tape = loss._tape
    if tape is None:
        raise DisconnectedGraphError("loss was not computed from any watched tensor under a GradTape")

    adjoint: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    for node in reversed(tape.nodes):
        g = adjoint.get(id(node.output))
        if g is None:
            continue
        prim = get_primitive(node.op)
        needs = tuple(t.requires_grad for t in node.inputs)
        grads = prim.backward(g, [t.data for t in node.inputs], node.output.data, node.cache, node.attrs, needs)
        for t, gi in zip(node.inputs, grads):
            if gi is None or not t.requires_grad:
                continue
            key = id(t)
            adjoint[key] = adjoint[key] + gi if key in adjoint else np.array(gi, dtype=np.float64)

    result = []
    for i, t in enumerate(wrt):
        g = adjoint.get(id(t))
        if g is None:
            raise DisconnectedGraphError(f"wrt[{i}] {t!r} does not influence the loss")
        result.append(g)
    logger.debug(f"grad: {len(tape.nodes)} tape nodes, {len(result)} gradients")
    return result
