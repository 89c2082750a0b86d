"""Dense float64 tensors with reverse-mode gradients.

A minimal tape: every op records its parents and a backward closure; calling
`backward()` on a scalar walks the graph in reverse topological order and
accumulates gradients into `.grad` buffers. Double precision throughout so
finite-difference checks are meaningful.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch

_GRAD_ENABLED = True


class no_grad:
    """Context manager disabling tape construction (inference fast path)."""

    def __enter__(self):
        global _GRAD_ENABLED
        self._prev = _GRAD_ENABLED
        _GRAD_ENABLED = False
        return self

    def __exit__(self, *exc):
        global _GRAD_ENABLED
        _GRAD_ENABLED = self._prev
        return False


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum `grad` down to `shape`, undoing numpy broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad) and _GRAD_ENABLED
        self._backward = None
        self._parents: tuple[Tensor, ...] = ()

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def _wrap(value) -> "Tensor":
        return value if isinstance(value, Tensor) else Tensor(value)

    @staticmethod
    def _from_op(data: np.ndarray, parents: tuple["Tensor", ...], backward) -> "Tensor":
        out = Tensor(data)
        if _GRAD_ENABLED and any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = parents
            out._backward = backward
        return out

    def _accumulate(self, grad: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad

    # -- introspection ---------------------------------------------------------

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
        return float(self.data)

    def __repr__(self) -> str:
        flag = ", grad" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}{flag})"

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    # -- elementwise arithmetic -------------------------------------------------

    def __add__(self, other) -> "Tensor":
        a, b = self, Tensor._wrap(other)
        data = a.data + b.data

        def backward(g):
            if a.requires_grad:
                a._accumulate(_unbroadcast(g, a.data.shape))
            if b.requires_grad:
                b._accumulate(_unbroadcast(g, b.data.shape))

        return Tensor._from_op(data, (a, b), backward)

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        a = self

        def backward(g):
            if a.requires_grad:
                a._accumulate(-g)

        return Tensor._from_op(-a.data, (a,), backward)

    def __sub__(self, other) -> "Tensor":
        return self + (-Tensor._wrap(other))

    def __rsub__(self, other) -> "Tensor":
        return Tensor._wrap(other) + (-self)

    def __mul__(self, other) -> "Tensor":
        a, b = self, Tensor._wrap(other)
        data = a.data * b.data

        def backward(g):
            if a.requires_grad:
                a._accumulate(_unbroadcast(g * b.data, a.data.shape))
            if b.requires_grad:
                b._accumulate(_unbroadcast(g * a.data, b.data.shape))

        return Tensor._from_op(data, (a, b), backward)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Tensor":
        a, b = self, Tensor._wrap(other)
        data = a.data / b.data

        def backward(g):
            if a.requires_grad:
                a._accumulate(_unbroadcast(g / b.data, a.data.shape))
            if b.requires_grad:
                b._accumulate(_unbroadcast(-g * a.data / (b.data * b.data), b.data.shape))

        return Tensor._from_op(data, (a, b), backward)

    def __rtruediv__(self, other) -> "Tensor":
        return Tensor._wrap(other) / self

    def __pow__(self, exponent: float) -> "Tensor":
        a = self
        c = float(exponent)
        data = a.data ** c

        def backward(g):
            if a.requires_grad:
                a._accumulate(g * c * a.data ** (c - 1.0))

        return Tensor._from_op(data, (a,), backward)

    # -- reductions / shaping ----------------------------------------------------

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        a = self
        data = a.data.sum(axis=axis, keepdims=keepdims)

        def backward(g):
            if not a.requires_grad:
                return
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            a._accumulate(np.broadcast_to(g, a.data.shape).copy())

        return Tensor._from_op(data, (a,), backward)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        a = self
        data = a.data.mean(axis=axis, keepdims=keepdims)
        count = a.data.size / data.size

        def backward(g):
            if not a.requires_grad:
                return
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            a._accumulate(np.broadcast_to(g / count, a.data.shape).copy())

        return Tensor._from_op(data, (a,), backward)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        a = self
        old = a.data.shape
        data = a.data.reshape(shape)

        def backward(g):
            if a.requires_grad:
                a._accumulate(g.reshape(old))

        return Tensor._from_op(data, (a,), backward)

    def transpose(self, axes: tuple[int, ...]) -> "Tensor":
        a = self
        data = a.data.transpose(axes)
        inverse = tuple(np.argsort(axes))

        def backward(g):
            if a.requires_grad:
                a._accumulate(g.transpose(inverse))

        return Tensor._from_op(data, (a,), backward)

    def __getitem__(self, key) -> "Tensor":
        a = self
        data = a.data[key]

        def backward(g):
            if a.requires_grad:
                full = np.zeros_like(a.data)
                full[key] += g
                a._accumulate(full)

        return Tensor._from_op(data, (a,), backward)

    # -- nonlinearities -----------------------------------------------------------

    def relu(self) -> "Tensor":
        a = self
        data = np.maximum(a.data, 0.0)

        def backward(g):
            if a.requires_grad:
                a._accumulate(g * (a.data > 0.0))

        return Tensor._from_op(data, (a,), backward)

    def exp(self) -> "Tensor":
        a = self
        data = np.exp(a.data)

        def backward(g):
            if a.requires_grad:
                a._accumulate(g * data)

        return Tensor._from_op(data, (a,), backward)

    def log(self) -> "Tensor":
        a = self
        data = np.log(a.data)

        def backward(g):
            if a.requires_grad:
                a._accumulate(g / a.data)

        return Tensor._from_op(data, (a,), backward)

    # -- linear algebra -------------------------------------------------------------

    def __matmul__(self, other) -> "Tensor":
        a, b = self, Tensor._wrap(other)
        if a.ndim < 1 or b.ndim < 1:
            raise ShapeMismatch("matmul requires at least 1-d operands")
        if a.data.shape[-1] != b.data.shape[-2 if b.ndim > 1 else 0]:
            raise ShapeMismatch(f"matmul inner dims disagree: {a.shape} @ {b.shape}")
        data = a.data @ b.data

        def backward(g):
            if a.requires_grad:
                ga = g @ np.swapaxes(b.data, -1, -2)
                a._accumulate(_unbroadcast(ga, a.data.shape))
            if b.requires_grad:
                gb = np.swapaxes(a.data, -1, -2) @ g
                b._accumulate(_unbroadcast(gb, b.data.shape))

        return Tensor._from_op(data, (a, b), backward)

    # -- softmax family ----------------------------------------------------------------

    def softmax(self, axis: int = -1) -> "Tensor":
        a = self
        shifted = a.data - a.data.max(axis=axis, keepdims=True)
        e = np.exp(shifted)
        y = e / e.sum(axis=axis, keepdims=True)

        def backward(g):
            if a.requires_grad:
                a._accumulate((g - (g * y).sum(axis=axis, keepdims=True)) * y)

        return Tensor._from_op(y, (a,), backward)

    def log_softmax(self, axis: int = -1) -> "Tensor":
        a = self
        shifted = a.data - a.data.max(axis=axis, keepdims=True)
        lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
        y = shifted - lse
        p = np.exp(y)

        def backward(g):
            if a.requires_grad:
                a._accumulate(g - p * g.sum(axis=axis, keepdims=True))

        return Tensor._from_op(y, (a,), backward)

    # -- autodiff ------------------------------------------------------------------------

    def backward(self) -> None:
        """Reverse-mode pass from a scalar output."""
        if self.data.size != 1:
            raise ValueError("backward() requires a scalar tensor")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)


def embedding(weight: Tensor, ids: np.ndarray) -> Tensor:
    """Row gather weight[ids]; backward scatter-adds (handles repeated ids)."""
    ids = np.asarray(ids, dtype=np.int64)
    data = weight.data[ids]

    def backward(g):
        if weight.requires_grad:
            full = np.zeros_like(weight.data)
            np.add.at(full, ids, g)
            weight._accumulate(full)

    return Tensor._from_op(data, (weight,), backward)


def parameter(data, rng: np.random.Generator | None = None, shape=None) -> Tensor:
    """Leaf tensor that accumulates gradients."""
    if data is None:
        if rng is None or shape is None:
            raise ValueError("parameter() needs either data or (rng, shape)")
        data = rng.standard_normal(shape)
    return Tensor(data, requires_grad=True)


def xavier_uniform(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)
