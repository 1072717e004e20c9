"""Reverse-mode differentiable tensors backed by numpy arrays.

Only the primitives the codec's networks need are implemented: broadcast
arithmetic, matmul, reductions, shape moves, the usual activations, fused
(log-)softmax and a few loss kernels. Forward passes are deterministic for
fixed inputs; all randomness enters through explicitly passed generators.
"""
from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

_DEFAULT_DTYPE = np.float32
_GRAD_ENABLED = True


def set_default_dtype(dtype) -> None:
    """Set the dtype new tensors are created with (float32 or float64)."""
    global _DEFAULT_DTYPE
    dtype = np.dtype(dtype).type
    if dtype not in (np.float32, np.float64):
        raise ValueError(f"unsupported default dtype {dtype}")
    _DEFAULT_DTYPE = dtype


def default_dtype():
    return _DEFAULT_DTYPE


class no_grad:
    """Context manager disabling graph construction (evaluation paths)."""

    def __enter__(self):
        global _GRAD_ENABLED
        self._prev = _GRAD_ENABLED
        _GRAD_ENABLED = False
        return self

    def __exit__(self, *exc):
        global _GRAD_ENABLED
        _GRAD_ENABLED = self._prev
        return False


def grad_enabled() -> bool:
    return _GRAD_ENABLED


class Tensor:
    """A dense real array with an optional gradient of the same shape."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data, dtype=dtype if dtype is not None else _DEFAULT_DTYPE)
        self.data = arr
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple = ()
        self._backward = None

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def _wrap(other, dtype=None) -> "Tensor":
        if isinstance(other, Tensor):
            return other
        return Tensor(other, dtype=dtype)

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}, grad={self.requires_grad})"

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data, dtype=self.data.dtype)

    def accumulate_grad(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad[...] = 0.0

    # -- autodiff machinery ----------------------------------------------------

    def backward(self) -> None:
        """Accumulate d(self)/d(leaf) into every reachable leaf's ``grad``.

        ``self`` must be scalar. Repeated calls keep accumulating; callers
        reset gradients between steps.
        """
        if self.data.size != 1:
            raise ValueError(f"backward() requires a scalar, got shape {self.data.shape}")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        self.accumulate_grad(np.ones_like(self.data))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- arithmetic -------------------------------------------------------------

    def __add__(self, other):
        other = Tensor._wrap(other, self.data.dtype)
        out = _make(self.data + other.data, (self, other))
        if out._parents:
            def bw(g):
                if self.requires_grad:
                    self.accumulate_grad(_unbroadcast(g, self.data.shape))
                if other.requires_grad:
                    other.accumulate_grad(_unbroadcast(g, other.data.shape))
            out._backward = bw
        return out

    __radd__ = __add__

    def __neg__(self):
        out = _make(-self.data, (self,))
        if out._parents:
            out._backward = lambda g: self.accumulate_grad(-g)
        return out

    def __sub__(self, other):
        return self + (-Tensor._wrap(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = Tensor._wrap(other, self.data.dtype)
        out = _make(self.data * other.data, (self, other))
        if out._parents:
            def bw(g):
                if self.requires_grad:
                    self.accumulate_grad(_unbroadcast(g * other.data, self.data.shape))
                if other.requires_grad:
                    other.accumulate_grad(_unbroadcast(g * self.data, other.data.shape))
            out._backward = bw
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, (int, float, np.floating, np.integer)):
            raise TypeError("tensor division is only supported by scalars")
        return self * (1.0 / float(other))

    def __pow__(self, p: float):
        out = _make(self.data ** p, (self,))
        if out._parents:
            out._backward = lambda g: self.accumulate_grad(g * p * self.data ** (p - 1))
        return out

    def __matmul__(self, other):
        other = Tensor._wrap(other)
        if self.data.ndim != 2 or other.data.ndim != 2:
            raise ValueError(
                f"matmul supports 2-D operands, got {self.data.shape} @ {other.data.shape}"
            )
        out = _make(self.data @ other.data, (self, other))
        if out._parents:
            def bw(g):
                if self.requires_grad:
                    self.accumulate_grad(g @ other.data.T)
                if other.requires_grad:
                    other.accumulate_grad(self.data.T @ g)
            out._backward = bw
        return out

    # -- elementwise functions ---------------------------------------------------

    def exp(self):
        y = np.exp(self.data)
        out = _make(y, (self,))
        if out._parents:
            out._backward = lambda g: self.accumulate_grad(g * y)
        return out

    def log(self):
        out = _make(np.log(self.data), (self,))
        if out._parents:
            out._backward = lambda g: self.accumulate_grad(g / self.data)
        return out

    def relu(self):
        mask = self.data > 0
        out = _make(np.where(mask, self.data, 0.0), (self,))
        if out._parents:
            out._backward = lambda g: self.accumulate_grad(g * mask)
        return out

    def sigmoid(self):
        # stable piecewise form; output in (0, 1)
        x = self.data
        y = np.empty_like(x)
        pos = x >= 0
        y[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        y[~pos] = ex / (1.0 + ex)
        out = _make(y, (self,))
        if out._parents:
            out._backward = lambda g: self.accumulate_grad(g * y * (1.0 - y))
        return out

    # -- reductions ---------------------------------------------------------------

    def sum(self, axis=None, keepdims: bool = False):
        out = _make(self.data.sum(axis=axis, keepdims=keepdims), (self,))
        if out._parents:
            shape, _ = _reduced_shape(self.data.shape, axis)

            def bw(g):
                if not keepdims and axis is not None:
                    g = g.reshape(shape)
                self.accumulate_grad(np.broadcast_to(g, self.data.shape))
            out._backward = bw
        return out

    def mean(self, axis=None, keepdims: bool = False):
        n = self.data.size if axis is None else _axis_count(self.data.shape, axis)
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    # -- shape moves ----------------------------------------------------------------

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        out = _make(self.data.reshape(shape), (self,))
        if out._parents:
            out._backward = lambda g: self.accumulate_grad(g.reshape(self.data.shape))
        return out

    def transpose(self, axes: Sequence[int]):
        axes = tuple(axes)
        inv = np.argsort(axes)
        out = _make(self.data.transpose(axes), (self,))
        if out._parents:
            out._backward = lambda g: self.accumulate_grad(g.transpose(inv))
        return out

    def take_rows(self, indices: np.ndarray):
        """Differentiable row gather: ``out[i] = self[indices[i]]``."""
        idx = np.asarray(indices)
        out = _make(self.data[idx], (self,))
        if out._parents:
            def bw(g):
                if self.grad is None:
                    self.grad = np.zeros_like(self.data)
                np.add.at(self.grad, idx, g)
            out._backward = bw
        return out


def _make(data: np.ndarray, parents: tuple) -> Tensor:
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out._backward = None
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
    else:
        out.requires_grad = False
        out._parents = ()
    return out


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum ``g`` over the axes numpy broadcast to reach ``g.shape`` from ``shape``."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def _reduced_shape(shape: tuple, axis) -> tuple:
    if axis is None:
        return (1,) * len(shape), None
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    axes = tuple(a % len(shape) for a in axes)
    return tuple(1 if i in axes else s for i, s in enumerate(shape)), axes


def _axis_count(shape: tuple, axis) -> int:
    axes = (axis,) if isinstance(axis, int) else tuple(axis)
    n = 1
    for a in axes:
        n *= shape[a % len(shape)]
    return n


class Parameter(Tensor):
    """A leaf tensor updated by an optimizer; its gradient is always allocated."""

    __slots__ = ("name",)

    def __init__(self, data, name: str = ""):
        super().__init__(data, requires_grad=True)
        self.grad = np.zeros_like(self.data)
        self.name = name

    def __repr__(self):
        return f"Parameter({self.name or 'unnamed'}, shape={self.data.shape})"


# -- fused kernels ------------------------------------------------------------------


def elementwise(x: Tensor, kind: str) -> Tensor:
    """Apply a named pointwise activation: 'relu', 'sigmoid' or 'identity'."""
    if kind == "relu":
        return x.relu()
    if kind == "sigmoid":
        return x.sigmoid()
    if kind == "identity":
        return x
    raise ValueError(f"unknown elementwise kind {kind!r}")


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    y = shifted - lse
    out = _make(y, (x,))
    if out._parents:
        def bw(g):
            x.accumulate_grad(g - np.exp(y) * g.sum(axis=axis, keepdims=True))
        out._backward = bw
    return out


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    s = e / e.sum(axis=axis, keepdims=True)
    out = _make(s, (x,))
    if out._parents:
        def bw(g):
            x.accumulate_grad(s * (g - (g * s).sum(axis=axis, keepdims=True)))
        out._backward = bw
    return out


def plogp(p: Tensor) -> Tensor:
    """x*log(x) with the 0*log(0) := 0 convention.

    The gradient at exact zeros is taken as 0; on training paths the inputs
    come out of a softmax and are strictly positive.
    """
    nonzero = p.data > 0
    y = np.where(nonzero, p.data * np.log(np.where(nonzero, p.data, 1.0)), 0.0)
    out = _make(y, (p,))
    if out._parents:
        def bw(g):
            local = np.where(nonzero, np.log(np.where(nonzero, p.data, 1.0)) + 1.0, 0.0)
            p.accumulate_grad(g * local)
        out._backward = bw
    return out


def mse(pred: Tensor, target: Tensor) -> Tensor:
    """Mean of squared differences over all elements."""
    target = Tensor._wrap(target, pred.data.dtype)
    if pred.shape != target.shape:
        raise ValueError(f"mse shape mismatch: {pred.shape} vs {target.shape}")
    diff = pred - target
    return (diff * diff).mean()


def softmax_cross_entropy(logits: Tensor, target_indices: np.ndarray) -> Tensor:
    """Mean cross-entropy of rows of ``logits`` against integer targets."""
    idx = np.asarray(target_indices)
    if logits.data.ndim != 2 or idx.shape != (logits.data.shape[0],):
        raise ValueError(
            f"expected [P, N] logits and [P] targets, got {logits.shape} and {idx.shape}"
        )
    lsm = log_softmax(logits, axis=-1)
    rows = np.arange(idx.shape[0])
    picked = lsm.data[rows, idx]
    out = _make(np.asarray(-picked.mean(), dtype=logits.dtype), (lsm,))
    if out._parents:
        def bw(g):
            gi = np.zeros_like(lsm.data)
            gi[rows, idx] = -g / idx.shape[0]
            lsm.accumulate_grad(gi)
        out._backward = bw
    return out


def parameters_of(obj) -> Iterable[Parameter]:
    """Yield parameters reachable from a module-like object (see nn.Module)."""
    seen = set()
    stack = [obj]
    while stack:
        o = stack.pop()
        if id(o) in seen:
            continue
        seen.add(id(o))
        if isinstance(o, Parameter):
            yield o
        elif hasattr(o, "__dict__"):
            stack.extend(v for v in vars(o).values() if not isinstance(v, (str, bytes)))
        elif isinstance(o, (list, tuple)):
            stack.extend(o)
