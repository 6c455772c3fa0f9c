"""Reverse-mode automatic differentiation over numpy arrays.

Every differentiable operation records its inputs and a backward closure
on the produced Tensor; ``Tensor.backward`` replays the recorded graph in
exact reverse execution order (a creation counter orders the tape) and
accumulates gradients additively at fan-out points.

Training runs in float32; gradient-check tests switch the engine to
float64 with ``default_dtype`` because central finite differences need
the extra precision.
"""

from __future__ import annotations

import itertools
from contextlib import contextmanager

import numpy as np

from ..errors import InvalidShapeError, NumericError

_DTYPE = np.float32
_GRAD_ENABLED = True
_SEQ = itertools.count()


def default_dtype():
    return _DTYPE


def set_default_dtype(dtype) -> None:
    global _DTYPE
    if dtype not in (np.float32, np.float64):
        raise ValueError("dtype must be float32 or float64")
    _DTYPE = dtype


@contextmanager
def using_dtype(dtype):
    saved = _DTYPE
    set_default_dtype(dtype)
    try:
        yield
    finally:
        set_default_dtype(saved)


@contextmanager
def no_grad():
    """Disable graph recording inside the block (inference, EMA updates)."""
    global _GRAD_ENABLED
    saved = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = saved


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "_seq")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(_DTYPE)
        self.data = arr
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = None
        self._backward = None
        self._seq = 0

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self, grad=None) -> None:
        if grad is None:
            grad = np.ones_like(self.data)
        grad = np.asarray(grad, dtype=self.data.dtype)
        if grad.shape != self.data.shape:
            raise InvalidShapeError(f"seed gradient shape {grad.shape} != value shape {self.data.shape}")
        if self._parents is None:
            self.grad = grad if self.grad is None else self.grad + grad
            return

        nodes, seen, stack = [], set(), [self]
        while stack:
            t = stack.pop()
            if id(t) in seen or t._parents is None:
                continue
            seen.add(id(t))
            nodes.append(t)
            stack.extend(t._parents)
        nodes.sort(key=lambda t: t._seq, reverse=True)

        pending: dict[int, np.ndarray] = {id(self): grad}
        for t in nodes:
            g = pending.pop(id(t), None)
            if g is None:
                continue
            t.grad = g if t.grad is None else t.grad + g
            for parent, pg in zip(t._parents, t._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                if parent._parents is None:  # leaf: accumulate directly
                    parent.grad = pg if parent.grad is None else parent.grad + pg
                else:
                    acc = pending.get(id(parent))
                    pending[id(parent)] = pg if acc is None else acc + pg

    # operator sugar; implementations live below
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return take(self, idx)

    def reshape(self, *shape):
        return reshape(self, shape[0] if len(shape) == 1 and isinstance(shape[0], (tuple, list)) else shape)

    def swapaxes(self, a, b):
        return swapaxes(self, a, b)

    def sum(self, axis=None, keepdims=False):
        return tensor_sum(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return tensor_mean(self, axis, keepdims)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _check_finite(arr: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(arr)):
        raise NumericError("operation produced a non-finite value")
    return arr


def _make(data: np.ndarray, parents: tuple[Tensor, ...], backward) -> Tensor:
    out = Tensor(_check_finite(data))
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward
        out._seq = next(_SEQ)
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _make(
        a.data + b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)),
    )


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _make(
        a.data - b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.data.shape), _unbroadcast(-g, b.data.shape)),
    )


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    return _make(
        a.data * b.data,
        (a, b),
        lambda g: (_unbroadcast(g * b.data, a.data.shape), _unbroadcast(g * a.data, b.data.shape)),
    )


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    with np.errstate(divide="ignore", invalid="ignore"):
        out_data = a.data / b.data
    return _make(
        out_data,
        (a, b),
        lambda g: (
            _unbroadcast(g / b.data, a.data.shape),
            _unbroadcast(-g * a.data / (b.data * b.data), b.data.shape),
        ),
    )


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise InvalidShapeError("matmul operands must have rank >= 2")

    def backward(g):
        ga = g @ b.data.swapaxes(-1, -2)
        gb = a.data.swapaxes(-1, -2) @ g
        return _unbroadcast(ga, a.data.shape), _unbroadcast(gb, b.data.shape)

    return _make(a.data @ b.data, (a, b), backward)


def relu(x) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0
    return _make(np.where(mask, x.data, 0.0), (x,), lambda g: (g * mask,))


def exp(x) -> Tensor:
    x = as_tensor(x)
    out_data = np.exp(x.data)
    return _make(out_data, (x,), lambda g: (g * out_data,))


def log(x) -> Tensor:
    x = as_tensor(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out_data = np.log(x.data)
    return _make(out_data, (x,), lambda g: (g / x.data,))


def sqrt(x) -> Tensor:
    x = as_tensor(x)
    out_data = np.sqrt(x.data)
    return _make(out_data, (x,), lambda g: (g * 0.5 / out_data,))


def maximum_scalar(x, floor: float) -> Tensor:
    """Clamp below at ``floor``; no gradient flows to clamped cells."""
    x = as_tensor(x)
    mask = x.data > floor
    return _make(np.where(mask, x.data, floor), (x,), lambda g: (g * mask,))


def clip(x, lo: float, hi: float) -> Tensor:
    x = as_tensor(x)
    mask = (x.data > lo) & (x.data < hi)
    return _make(np.clip(x.data, lo, hi), (x,), lambda g: (g * mask,))


def stop_gradient(x) -> Tensor:
    return as_tensor(x).detach()


def tensor_sum(x, axis=None, keepdims=False) -> Tensor:
    x = as_tensor(x)

    def backward(g):
        if axis is None:
            return (np.broadcast_to(g, x.data.shape).copy(),)
        if not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.data.shape).copy(),)

    return _make(x.data.sum(axis=axis, keepdims=keepdims), (x,), backward)


def tensor_mean(x, axis=None, keepdims=False) -> Tensor:
    x = as_tensor(x)
    count = x.data.size if axis is None else x.data.shape[axis]
    return tensor_sum(x, axis, keepdims) * (1.0 / count)


def reshape(x, shape) -> Tensor:
    x = as_tensor(x)
    return _make(x.data.reshape(shape), (x,), lambda g: (g.reshape(x.data.shape),))


def swapaxes(x, a, b) -> Tensor:
    x = as_tensor(x)
    return _make(x.data.swapaxes(a, b), (x,), lambda g: (g.swapaxes(a, b),))


def take(x, idx) -> Tensor:
    """Basic slicing/indexing with scatter-add backward."""
    x = as_tensor(x)

    def backward(g):
        full = np.zeros_like(x.data)
        np.add.at(full, idx, g)
        return (full,)

    return _make(x.data[idx], (x,), backward)


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(g, splits, axis=axis))

    return _make(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), backward)


def softmax(x, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        inner = (g * out_data).sum(axis=axis, keepdims=True)
        return (out_data * (g - inner),)

    return _make(out_data, (x,), backward)


def masked_softmax(x, mask: np.ndarray, axis: int = -1) -> Tensor:
    """Softmax over positions where ``mask`` is True.

    Masked positions get exactly zero weight; rows with no allowed
    position produce all-zero output instead of NaN.
    """
    x = as_tensor(x)
    mask = np.broadcast_to(np.asarray(mask, dtype=bool), x.data.shape)
    neg = np.where(mask, x.data, -np.inf)
    mx = neg.max(axis=axis, keepdims=True)
    mx = np.where(np.isfinite(mx), mx, 0.0)
    e = np.where(mask, np.exp(neg - mx), 0.0)
    s = e.sum(axis=axis, keepdims=True)
    out_data = e / np.where(s == 0.0, 1.0, s)

    def backward(g):
        inner = (g * out_data).sum(axis=axis, keepdims=True)
        return (out_data * (g - inner),)

    return _make(out_data, (x,), backward)


def log_softmax(x, axis: int = -1) -> Tensor:
    x = as_tensor(x)
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out_data = shifted - lse
    soft = np.exp(out_data)

    def backward(g):
        return (g - soft * g.sum(axis=axis, keepdims=True),)

    return _make(out_data, (x,), backward)


def layer_norm(x, gamma, beta, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then scale and shift."""
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = centered * inv
    n = x.data.shape[-1]

    def backward(g):
        axes = tuple(range(g.ndim - 1))
        g_gamma = (g * xhat).sum(axis=axes)
        g_beta = g.sum(axis=axes)
        gx_hat = g * gamma.data
        gx = inv * (gx_hat - gx_hat.mean(axis=-1, keepdims=True) - xhat * (gx_hat * xhat).mean(axis=-1, keepdims=True))
        return gx, _unbroadcast(g_gamma, gamma.data.shape), _unbroadcast(g_beta, beta.data.shape)

    return _make(xhat * gamma.data + beta.data, (x, gamma, beta), backward)


def embedding(table, indices) -> Tensor:
    """Row lookup ``table[indices]``; backward scatter-adds into the table."""
    table = as_tensor(table)
    indices = np.asarray(indices)
    if indices.size and (indices.min() < 0 or indices.max() >= table.data.shape[0]):
        raise InvalidShapeError(
            f"index out of range for embedding table of {table.data.shape[0]} rows"
        )

    def backward(g):
        full = np.zeros_like(table.data)
        np.add.at(full, indices, g)
        return (full,)

    return _make(table.data[indices], (table,), backward)


def linear(x, weight, bias=None) -> Tensor:
    """Affine map ``x @ weight + bias`` with weight of shape (in, out)."""
    out = matmul(x, weight)
    return out if bias is None else add(out, bias)
