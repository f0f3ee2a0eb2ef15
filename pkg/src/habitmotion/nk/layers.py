"""Network layers: linear, conv1d, residual blocks, layer norm,
multi-head attention, nearest-neighbour upsampling, transformer blocks.

Layers are Modules holding named Parameters; initialization is
Kaiming-uniform for weights and zeros for biases, with a per-parameter
seeded stream so rebuilding a model reproduces it bit for bit.
"""

from __future__ import annotations

import math

import numpy as np

from habitmotion import kernels
from habitmotion.nk import tensor as T
from habitmotion.nk.rng import rng_for
from habitmotion.nk.tensor import Parameter, Tensor


class Init:
    """Deterministic parameter initializer bound to a run seed."""

    def __init__(self, seed: int):
        self.seed = int(seed)

    def kaiming(self, shape, fan_in, name):
        bound = math.sqrt(6.0 / fan_in)
        return rng_for(self.seed, "init", name).uniform(-bound, bound, size=shape)

    def zeros(self, shape):
        return np.zeros(shape)


class Module:
    def parameters(self):
        seen, out = set(), []

        def walk(obj):
            for v in vars(obj).values():
                if isinstance(v, Parameter):
                    if id(v) not in seen:
                        seen.add(id(v))
                        out.append(v)
                elif isinstance(v, Module):
                    walk(v)
                elif isinstance(v, (list, tuple)):
                    for u in v:
                        if isinstance(u, Module):
                            walk(u)
                        elif isinstance(u, Parameter) and id(u) not in seen:
                            seen.add(id(u))
                            out.append(u)

        walk(self)
        return out

    def state_dict(self):
        return {p.name: p.data for p in self.parameters()}

    def load_state_dict(self, entries):
        for p in self.parameters():
            if p.name not in entries:
                raise KeyError(f"checkpoint is missing parameter {p.name}")
            arr = np.asarray(entries[p.name], dtype=np.float64)
            if arr.shape != p.data.shape:
                raise ValueError(
                    f"shape mismatch for {p.name}: checkpoint {arr.shape}, model {p.data.shape}"
                )
            p.data = arr.copy()


class Linear(Module):
    def __init__(self, init: Init, name: str, d_in: int, d_out: int, bias=True, zero_init=False):
        if zero_init:
            w = init.zeros((d_in, d_out))
        else:
            w = init.kaiming((d_in, d_out), d_in, f"{name}.w")
        self.w = Parameter(w, f"{name}.w")
        self.b = Parameter(init.zeros(d_out), f"{name}.b") if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        y = T.matmul(x, self.w)
        return y + self.b if self.b is not None else y


def resolve_same_padding(length: int, kernel: int, stride: int, dilation: int):
    """Symmetric zero padding giving L_out = ceil(L_in / stride)."""
    keff = (kernel - 1) * dilation + 1
    lout = -(-length // stride)
    total = max(0, (lout - 1) * stride + keff - length)
    return total // 2, total - total // 2


def conv1d(x: Tensor, w: Tensor, b: Tensor, stride=1, dilation=1, padding="same") -> Tensor:
    """Differentiable conv over (B, C, L) inputs, via the kernel backend.

    padding is "same" (symmetric zero pad, L_out = ceil(L/stride)) or an
    explicit int applied to both sides.
    """
    if stride < 1 or dilation < 1:
        raise ValueError(f"invalid stride/dilation: {stride}/{dilation}")
    B, ci, L = x.data.shape
    co, ci2, k = w.data.shape
    if ci != ci2:
        raise ValueError(f"conv1d channel mismatch: input {ci}, weight {ci2}")
    if padding == "same":
        pad_l, pad_r = resolve_same_padding(L, k, stride, dilation)
    else:
        pad_l = pad_r = int(padding)
    xd = np.ascontiguousarray(x.data)
    y = kernels.conv1d_forward(xd, w.data, b.data, stride, dilation, pad_l, pad_r)

    def bwd(g):
        gx, gw, gb = kernels.conv1d_backward(
            xd, w.data, np.ascontiguousarray(g), stride, dilation, pad_l, pad_r
        )
        if x.requires_grad:
            x._acc(gx)
        if w.requires_grad:
            w._acc(gw)
        if b.requires_grad:
            b._acc(gb)

    return T._from_op(y, (x, w, b), bwd)


class Conv1d(Module):
    def __init__(self, init, name, c_in, c_out, kernel, stride=1, dilation=1, padding="same"):
        self.stride = stride
        self.dilation = dilation
        self.padding = padding
        self.w = Parameter(
            init.kaiming((c_out, c_in, kernel), c_in * kernel, f"{name}.w"), f"{name}.w"
        )
        self.b = Parameter(init.zeros(c_out), f"{name}.b")

    def __call__(self, x):
        return conv1d(x, self.w, self.b, self.stride, self.dilation, self.padding)


def upsample_nearest(x: Tensor, factor: int) -> Tensor:
    """Repeat each time step `factor` times along the last axis."""
    if factor < 1:
        raise ValueError("upsample factor must be >= 1")
    out = np.repeat(x.data, factor, axis=-1)

    def bwd(g):
        if x.requires_grad:
            x._acc(g.reshape(x.data.shape + (factor,)).sum(axis=-1))

    return T._from_op(out, (x,), bwd)


class ResBlock1d(Module):
    """conv(k3, dilated) -> relu -> conv(k1), added back to the input."""

    def __init__(self, init, name, channels, dilation=3):
        self.conv1 = Conv1d(init, f"{name}.conv1", channels, channels, 3, dilation=dilation)
        self.conv2 = Conv1d(init, f"{name}.conv2", channels, channels, 1)

    def __call__(self, x):
        return x + self.conv2(T.relu(self.conv1(x)))


class LayerNorm(Module):
    def __init__(self, init, name, dim, eps=1e-5):
        self.eps = eps
        self.gamma = Parameter(np.ones(dim), f"{name}.gamma")
        self.beta = Parameter(init.zeros(dim), f"{name}.beta")

    def __call__(self, x: Tensor) -> Tensor:
        gamma, beta, eps = self.gamma, self.beta, self.eps
        mu = x.data.mean(axis=-1, keepdims=True)
        xc = x.data - mu
        var = (xc * xc).mean(axis=-1, keepdims=True)
        inv = 1.0 / np.sqrt(var + eps)
        xhat = xc * inv
        out = xhat * gamma.data + beta.data
        red = tuple(range(out.ndim - 1))

        def bwd(g):
            if gamma.requires_grad:
                gamma._acc((g * xhat).sum(axis=red))
            if beta.requires_grad:
                beta._acc(g.sum(axis=red))
            if x.requires_grad:
                gh = g * gamma.data
                x._acc(
                    inv
                    * (
                        gh
                        - gh.mean(axis=-1, keepdims=True)
                        - xhat * (gh * xhat).mean(axis=-1, keepdims=True)
                    )
                )

        return T._from_op(out, (x, gamma, beta), bwd)


class MultiHeadAttention(Module):
    """Standard scaled dot-product self-attention over (B, T, D)."""

    def __init__(self, init, name, dim, heads):
        if dim % heads != 0:
            raise ValueError(f"attention dim {dim} not divisible by heads {heads}")
        self.dim = dim
        self.heads = heads
        self.wq = Linear(init, f"{name}.wq", dim, dim)
        self.wk = Linear(init, f"{name}.wk", dim, dim)
        self.wv = Linear(init, f"{name}.wv", dim, dim)
        self.wo = Linear(init, f"{name}.wo", dim, dim)

    def _split(self, x, B, L):
        hd = self.dim // self.heads
        return x.reshape((B, L, self.heads, hd)).transpose((0, 2, 1, 3)).reshape(
            (B * self.heads, L, hd)
        )

    def __call__(self, x: Tensor) -> Tensor:
        B, L, D = x.data.shape
        hd = D // self.heads
        q = self._split(self.wq(x), B, L)
        k = self._split(self.wk(x), B, L)
        v = self._split(self.wv(x), B, L)
        att = T.softmax(T.matmul(q, k.transpose((0, 2, 1))) * (1.0 / math.sqrt(hd)), axis=-1)
        out = T.matmul(att, v)
        out = out.reshape((B, self.heads, L, hd)).transpose((0, 2, 1, 3)).reshape((B, L, D))
        return self.wo(out)


class TransformerBlock(Module):
    """Pre-norm block: x + MHA(LN(x)), then x + FFN(LN(x))."""

    def __init__(self, init, name, dim, heads, ff_mult=2):
        self.ln1 = LayerNorm(init, f"{name}.ln1", dim)
        self.att = MultiHeadAttention(init, f"{name}.att", dim, heads)
        self.ln2 = LayerNorm(init, f"{name}.ln2", dim)
        self.ff1 = Linear(init, f"{name}.ff1", dim, dim * ff_mult)
        self.ff2 = Linear(init, f"{name}.ff2", dim * ff_mult, dim)

    def __call__(self, x):
        x = x + self.att(self.ln1(x))
        return x + self.ff2(T.relu(self.ff1(self.ln2(x))))


def sinusoidal_positions(length: int, dim: int) -> np.ndarray:
    pos = np.arange(length)[:, None]
    i = np.arange(dim)[None, :]
    angles = pos / np.power(10000.0, (2 * (i // 2)) / dim)
    enc = np.where(i % 2 == 0, np.sin(angles), np.cos(angles))
    return enc


class TransformerEncoder(Module):
    """Input projection + positional encoding + a stack of blocks,
    mean-pooled over time."""

    def __init__(self, init, name, d_in, dim, heads, layers):
        self.dim = dim
        self.proj = Linear(init, f"{name}.proj", d_in, dim)
        self.blocks = [
            TransformerBlock(init, f"{name}.block{i}", dim, heads) for i in range(layers)
        ]
        self.ln_out = LayerNorm(init, f"{name}.ln_out", dim)

    def __call__(self, x: Tensor) -> Tensor:
        B, L, _ = x.data.shape
        h = self.proj(x) + Tensor(sinusoidal_positions(L, self.dim))
        for blk in self.blocks:
            h = blk(h)
        return self.ln_out(h).mean(axis=1)
