"""
Reverse-mode tape over float64 numpy arrays.

A ``Tensor`` records the operation that produced it together with a closure that
pushes the output gradient back to its parents. Calling ``backward()`` on a scalar
walks the recorded graph in reverse topological order. Only the operations needed
by the network jets and the PINN losses are provided.
"""

from typing import Callable, Iterable, List, Sequence, Tuple, Union

import numpy as np

ArrayLike = Union["Tensor", np.ndarray, float, int]


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    # ndarray binary operators defer to the reflected Tensor methods
    __array_ufunc__ = None
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "op")

    def __init__(self, data, requires_grad: bool = False, _parents: Tuple["Tensor", ...] = (), op: str = ""):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = _parents
        self._backward: Callable[[], None] = lambda: None
        self.op = op

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, op={self.op!r}, requires_grad={self.requires_grad})"

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @staticmethod
    def lift(value: ArrayLike) -> "Tensor":
        return value if isinstance(value, Tensor) else Tensor(value)

    def _accumulate(self, grad: np.ndarray) -> None:
        if not self.requires_grad:
            return
        grad = _unbroadcast(grad, self.data.shape)
        self.grad = grad.copy() if self.grad is None else self.grad + grad

    def _result(self, data: np.ndarray, parents: Sequence["Tensor"], op: str) -> "Tensor":
        tracked = tuple(p for p in parents if p.requires_grad)
        return Tensor(data, requires_grad=bool(tracked), _parents=tracked, op=op)

    def __add__(self, other: ArrayLike) -> "Tensor":
        other = Tensor.lift(other)
        out = self._result(self.data + other.data, (self, other), "+")
        if out.requires_grad:
            def _backward():
                self._accumulate(out.grad)
                other._accumulate(out.grad)
            out._backward = _backward
        return out

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        out = self._result(-self.data, (self,), "neg")
        if out.requires_grad:
            def _backward():
                self._accumulate(-out.grad)
            out._backward = _backward
        return out

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return self + (-Tensor.lift(other))

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return Tensor.lift(other) + (-self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        other = Tensor.lift(other)
        out = self._result(self.data * other.data, (self, other), "*")
        if out.requires_grad:
            def _backward():
                if self.requires_grad:
                    self._accumulate(out.grad * other.data)
                if other.requires_grad:
                    other._accumulate(out.grad * self.data)
            out._backward = _backward
        return out

    __rmul__ = __mul__

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        other = Tensor.lift(other)
        out = self._result(self.data / other.data, (self, other), "/")
        if out.requires_grad:
            def _backward():
                if self.requires_grad:
                    self._accumulate(out.grad / other.data)
                if other.requires_grad:
                    other._accumulate(-out.grad * self.data / (other.data * other.data))
            out._backward = _backward
        return out

    def __rtruediv__(self, other: ArrayLike) -> "Tensor":
        return Tensor.lift(other) / self

    def __matmul__(self, other: ArrayLike) -> "Tensor":
        other = Tensor.lift(other)
        out = self._result(self.data @ other.data, (self, other), "@")
        if out.requires_grad:
            def _backward():
                if self.requires_grad:
                    self._accumulate(out.grad @ other.data.T)
                if other.requires_grad:
                    other._accumulate(self.data.T @ out.grad)
            out._backward = _backward
        return out

    def __rmatmul__(self, other: ArrayLike) -> "Tensor":
        return Tensor.lift(other) @ self

    def tanh(self) -> "Tensor":
        value = np.tanh(self.data)
        out = self._result(value, (self,), "tanh")
        if out.requires_grad:
            def _backward():
                self._accumulate(out.grad * (1.0 - value * value))
            out._backward = _backward
        return out

    def square(self) -> "Tensor":
        return self * self

    def sum(self) -> "Tensor":
        out = self._result(np.sum(self.data), (self,), "sum")
        if out.requires_grad:
            def _backward():
                self._accumulate(np.broadcast_to(out.grad, self.data.shape))
            out._backward = _backward
        return out

    def mean(self) -> "Tensor":
        return self.sum() * (1.0 / self.data.size)

    def reshape(self, *shape: int) -> "Tensor":
        original = self.data.shape
        out = self._result(self.data.reshape(*shape), (self,), "reshape")
        if out.requires_grad:
            def _backward():
                self._accumulate(out.grad.reshape(original))
            out._backward = _backward
        return out

    def item(self) -> float:
        return float(self.data)

    def _topological_order(self) -> List["Tensor"]:
        order: List[Tensor] = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))
        return order

    def backward(self) -> None:
        """Accumulate d(self)/d(leaf) into every tracked leaf's ``grad``."""
        if not self.requires_grad:
            return
        if self.data.size != 1:
            raise ValueError("backward() needs a scalar output")
        self.grad = np.ones_like(self.data)
        for node in reversed(self._topological_order()):
            if node.grad is not None:
                node._backward()


def data_of(value: ArrayLike) -> np.ndarray:
    """Plain array behind a tensor or array-like value."""
    return value.data if isinstance(value, Tensor) else np.asarray(value, dtype=np.float64)


def mean_square(residual: ArrayLike) -> Tensor:
    return Tensor.lift(residual).square().mean()


def leaves(arrays: Iterable[np.ndarray]) -> List[Tensor]:
    return [Tensor(array, requires_grad=True) for array in arrays]
