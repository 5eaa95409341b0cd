"""Reverse-mode autodiff: tensors and the recording tape.

A Graph is a Wengert list. While a Graph is active (entered as a context
manager), every differentiable op appends an entry with its inputs and a
backward closure; Graph.backward walks the list in exact reverse order
and accumulates gradients additively into Tensor.grad. Without an active
Graph, ops only compute forward values.
"""

import numpy as np

from ..errors import DimensionError, GraphError, ValidationError
from .. import precision

_active_graphs = []


def active_graph():
    return _active_graphs[-1] if _active_graphs else None


class Tensor:
    """N-dimensional real array with optional gradient accumulator.

    data is a numpy array in the global precision; grad is either None or
    an array of identical shape. Tensors are treated as immutable values
    outside an active tape.
    """

    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data, requires_grad=False, dtype=None):
        self.data = np.asarray(data, dtype=dtype or precision.float_dtype())
        self.requires_grad = bool(requires_grad)
        self.grad = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def detach(self):
        """Same values, severed from any gradient path."""
        return Tensor(self.data, requires_grad=False, dtype=self.data.dtype)

    def zero_grad(self):
        self.grad = None

    def accumulate_grad(self, g):
        if g.shape != self.data.shape:
            raise DimensionError(
                f"gradient shape {g.shape} does not match tensor shape {self.data.shape}"
            )
        if self.grad is None:
            self.grad = g.copy()
        else:
            self.grad = self.grad + g

    def item(self):
        return float(self.data)

    def __float__(self):
        return float(self.data)

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}{flag})"

    # Operator sugar; the actual implementations live in ops.py.
    def __add__(self, other):
        from . import ops

        return ops.add(self, other)

    def __radd__(self, other):
        from . import ops

        return ops.add(self, other)

    def __sub__(self, other):
        from . import ops

        return ops.sub(self, other)

    def __mul__(self, other):
        from . import ops

        return ops.mul(self, other)

    def __rmul__(self, other):
        from . import ops

        return ops.mul(self, other)

    def __truediv__(self, other):
        from . import ops

        return ops.div(self, other)

    def __neg__(self):
        from . import ops

        return ops.scale(self, -1.0)


def parameter(data, dtype=None):
    """Tensor registered for gradient updates."""
    return Tensor(data, requires_grad=True, dtype=dtype)


def as_tensor(x):
    if isinstance(x, Tensor):
        return x
    return Tensor(x)


class Graph:
    """Recording tape: ordered op list, replayed in reverse by backward."""

    def __init__(self):
        self.entries = []  # (output, inputs, backward_fn)
        self._consumed = False

    def __enter__(self):
        _active_graphs.append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        popped = _active_graphs.pop()
        assert popped is self
        return False

    def record(self, output, inputs, backward_fn):
        self.entries.append((output, tuple(inputs), backward_fn))

    def backward(self, loss):
        """Seed d(loss)=1 and accumulate gradients into every participant.

        The tape is single-use: a second backward without re-recording
        raises GraphError.
        """
        if self._consumed:
            raise GraphError("backward already ran on this graph; record a new one")
        self._consumed = True
        if not isinstance(loss, Tensor):
            raise ValidationError("backward target must be a Tensor")
        if loss.data.size != 1:
            raise ValidationError("backward target must be scalar")
        loss.accumulate_grad(np.ones_like(loss.data))
        for output, inputs, backward_fn in reversed(self.entries):
            g = output.grad
            if g is None:
                continue
            input_grads = backward_fn(g)
            for tensor, grad in zip(inputs, input_grads):
                if grad is None or tensor is None:
                    continue
                tensor.accumulate_grad(np.asarray(grad, dtype=tensor.data.dtype))


def record_op(output, inputs, backward_fn):
    """Attach an op to the active tape if recording applies.

    Recording happens only when a Graph is active and at least one input
    participates in differentiation; the output then joins the gradient
    path as well.
    """
    graph = active_graph()
    needs = any(t is not None and t.requires_grad for t in inputs)
    if graph is not None and needs:
        output.requires_grad = True
        graph.record(output, inputs, backward_fn)
    return output
