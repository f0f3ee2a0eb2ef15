"""Dense float64 tensors with reverse-mode automatic differentiation.

The graph is built eagerly op by op; Tensor.backward() runs a topological
sweep accumulating gradients into the participating leaves. Everything is
64-bit so finite-difference gradient checks are meaningful.
"""

from __future__ import annotations

import warnings

import numpy as np

_GRAD_ENABLED = True


class no_grad:
    """Disable graph construction inside a `with` block (inference paths)."""

    def __enter__(self):
        global _GRAD_ENABLED
        self._prev = _GRAD_ENABLED
        _GRAD_ENABLED = False
        return self

    def __exit__(self, *exc):
        global _GRAD_ENABLED
        _GRAD_ENABLED = self._prev
        return False


def _unbroadcast(g, shape):
    """Reduce gradient g back to `shape` after numpy broadcasting."""
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_bwd")

    def __init__(self, data, requires_grad=False):
        self.data = np.asarray(data, dtype=np.float64)
        if not np.all(np.isfinite(self.data)):
            raise ValueError("tensor rejected: non-finite entries")
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = ()
        self._bwd = None

    # -- graph plumbing ------------------------------------------------

    def _acc(self, g):
        self.grad = g if self.grad is None else self.grad + g

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else _scalar_err()

    def detach(self) -> "Tensor":
        return _from_op(self.data, (), None)

    def backward(self):
        if self.data.size != 1:
            raise ValueError("backward requires a scalar loss")
        topo = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if p.requires_grad and id(p) not in visited:
                    stack.append((p, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._bwd is not None:
                node._bwd(node.grad)

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other):
        return add(self, _wrap(other))

    def __radd__(self, other):
        return add(_wrap(other), self)

    def __sub__(self, other):
        return sub(self, _wrap(other))

    def __rsub__(self, other):
        return sub(_wrap(other), self)

    def __mul__(self, other):
        return mul(self, _wrap(other))

    def __rmul__(self, other):
        return mul(_wrap(other), self)

    def __truediv__(self, other):
        return div(self, _wrap(other))

    def __rtruediv__(self, other):
        return div(_wrap(other), self)

    def __neg__(self):
        return mul(self, _wrap(-1.0))

    def __pow__(self, c):
        return power(self, float(c))

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return getitem(self, idx)

    def reshape(self, *shape):
        return reshape(self, shape if len(shape) > 1 else shape[0])

    def transpose(self, *axes):
        return transpose(self, axes if len(axes) > 1 else axes[0])

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis, keepdims)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


class Parameter(Tensor):
    """Named trainable leaf; names key optimizer state and checkpoints."""

    __slots__ = ("name",)

    def __init__(self, data, name: str):
        super().__init__(data, requires_grad=True)
        self.name = name

    def __repr__(self):
        return f"Parameter({self.name!r}, shape={self.data.shape})"


def _scalar_err():
    raise ValueError("item() requires a single-element tensor")


def _wrap(x):
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=np.float64))


def _from_op(data, parents, bwd):
    t = Tensor.__new__(Tensor)
    t.data = data
    t.grad = None
    req = _GRAD_ENABLED and any(p.requires_grad for p in parents)
    t.requires_grad = req
    t._parents = parents if req else ()
    t._bwd = bwd if req else None
    return t


def backward(scalar_loss: Tensor, params) -> None:
    """Populate gradients of `params` from a scalar loss.

    Disconnected parameters get a zero gradient and a warning instead of
    an error; everything else is the exact partial derivative.
    """
    params = list(params)
    for p in params:
        p.grad = None
    scalar_loss.backward()
    for p in params:
        if p.grad is None:
            warnings.warn(
                f"parameter {getattr(p, 'name', '<unnamed>')} is disconnected "
                "from the loss; gradient set to zero",
                stacklevel=2,
            )
            p.grad = np.zeros_like(p.data)


# -- primitive ops -----------------------------------------------------


def add(a, b):
    out = a.data + b.data

    def bwd(g):
        if a.requires_grad:
            a._acc(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b._acc(_unbroadcast(g, b.data.shape))

    return _from_op(out, (a, b), bwd)


def sub(a, b):
    out = a.data - b.data

    def bwd(g):
        if a.requires_grad:
            a._acc(_unbroadcast(g, a.data.shape))
        if b.requires_grad:
            b._acc(_unbroadcast(-g, b.data.shape))

    return _from_op(out, (a, b), bwd)


def mul(a, b):
    out = a.data * b.data

    def bwd(g):
        if a.requires_grad:
            a._acc(_unbroadcast(g * b.data, a.data.shape))
        if b.requires_grad:
            b._acc(_unbroadcast(g * a.data, b.data.shape))

    return _from_op(out, (a, b), bwd)


def div(a, b):
    out = a.data / b.data

    def bwd(g):
        if a.requires_grad:
            a._acc(_unbroadcast(g / b.data, a.data.shape))
        if b.requires_grad:
            b._acc(_unbroadcast(-g * a.data / (b.data * b.data), b.data.shape))

    return _from_op(out, (a, b), bwd)


def power(a, c: float):
    out = a.data**c

    def bwd(g):
        if a.requires_grad:
            a._acc(g * c * a.data ** (c - 1.0))

    return _from_op(out, (a,), bwd)


def matmul(a, b):
    out = a.data @ b.data

    def bwd(g):
        if a.requires_grad:
            ga = g @ np.swapaxes(b.data, -1, -2)
            a._acc(_unbroadcast(ga, a.data.shape))
        if b.requires_grad:
            gb = np.swapaxes(a.data, -1, -2) @ g
            b._acc(_unbroadcast(gb, b.data.shape))

    return _from_op(out, (a, b), bwd)


def exp(a):
    out = np.exp(a.data)

    def bwd(g):
        if a.requires_grad:
            a._acc(g * out)

    return _from_op(out, (a,), bwd)


def log(a):
    out = np.log(a.data)

    def bwd(g):
        if a.requires_grad:
            a._acc(g / a.data)

    return _from_op(out, (a,), bwd)


def sqrt(a):
    out = np.sqrt(a.data)

    def bwd(g):
        if a.requires_grad:
            a._acc(g * 0.5 / out)

    return _from_op(out, (a,), bwd)


def tanh(a):
    out = np.tanh(a.data)

    def bwd(g):
        if a.requires_grad:
            a._acc(g * (1.0 - out * out))

    return _from_op(out, (a,), bwd)


def relu(a):
    mask = a.data > 0
    out = np.where(mask, a.data, 0.0)

    def bwd(g):
        if a.requires_grad:
            a._acc(g * mask)

    return _from_op(out, (a,), bwd)


def softplus(a):
    out = np.logaddexp(0.0, a.data)

    def bwd(g):
        if a.requires_grad:
            a._acc(g / (1.0 + np.exp(-a.data)))

    return _from_op(out, (a,), bwd)


def tsum(a, axis=None, keepdims=False):
    out = a.data.sum(axis=axis, keepdims=keepdims)

    def bwd(g):
        if a.requires_grad:
            gg = np.asarray(g)
            if axis is not None and not keepdims:
                gg = np.expand_dims(gg, axis)
            a._acc(np.broadcast_to(gg, a.data.shape).copy())

    return _from_op(np.asarray(out), (a,), bwd)


def tmean(a, axis=None, keepdims=False):
    if axis is None:
        n = a.data.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        n = int(np.prod([a.data.shape[ax] for ax in axes]))
    return tsum(a, axis, keepdims) * (1.0 / n)


def reshape(a, shape):
    out = a.data.reshape(shape)

    def bwd(g):
        if a.requires_grad:
            a._acc(g.reshape(a.data.shape))

    return _from_op(out, (a,), bwd)


def transpose(a, axes):
    axes = tuple(axes)
    out = a.data.transpose(axes)
    inv = tuple(np.argsort(axes))

    def bwd(g):
        if a.requires_grad:
            a._acc(g.transpose(inv))

    return _from_op(out, (a,), bwd)


def getitem(a, idx):
    out = np.asarray(a.data[idx])

    def bwd(g):
        if a.requires_grad:
            gx = np.zeros_like(a.data)
            np.add.at(gx, idx, g)
            a._acc(gx)

    return _from_op(out, (a,), bwd)


def index_rows(a, indices):
    """Row gather with scatter-add backward (codebook-style lookup)."""
    idx = np.asarray(indices, dtype=np.int64)
    out = a.data[idx]

    def bwd(g):
        if a.requires_grad:
            gx = np.zeros_like(a.data)
            np.add.at(gx, idx, g)
            a._acc(gx)

    return _from_op(out, (a,), bwd)


def concat(tensors, axis):
    tensors = list(tensors)
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]

    def bwd(g):
        off = 0
        for t, s in zip(tensors, sizes):
            if t.requires_grad:
                sl = [slice(None)] * g.ndim
                sl[axis] = slice(off, off + s)
                t._acc(g[tuple(sl)])
            off += s

    return _from_op(out, tuple(tensors), bwd)


def softmax(a, axis=-1):
    m = a.data.max(axis=axis, keepdims=True)
    e = np.exp(a.data - m)
    y = e / e.sum(axis=axis, keepdims=True)

    def bwd(g):
        if a.requires_grad:
            a._acc(y * (g - (g * y).sum(axis=axis, keepdims=True)))

    return _from_op(y, (a,), bwd)


def log_softmax(a, axis=-1):
    m = a.data.max(axis=axis, keepdims=True)
    s = a.data - m
    lse = np.log(np.exp(s).sum(axis=axis, keepdims=True))
    out = s - lse

    def bwd(g):
        if a.requires_grad:
            a._acc(g - np.exp(out) * g.sum(axis=axis, keepdims=True))

    return _from_op(out, (a,), bwd)


def straight_through(a, b):
    """a + stopgrad(b - a): forwards b's value, routes gradients to a."""
    out = b.data.copy()

    def bwd(g):
        if a.requires_grad:
            a._acc(g)

    return _from_op(out, (a,), bwd)
