"""Central finite-difference gradient checking."""

import numpy as np

from habitmotion.nk.tensor import Tensor


def numerical_gradient(fn, tensors, index, h=1e-5):
    """Central differences of fn(tensors).item() w.r.t. tensors[index]."""
    target = tensors[index]
    grad = np.zeros_like(target.data)
    flat = target.data.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        hi = float(fn(*tensors).data.reshape(-1)[0])
        flat[i] = orig - h
        lo = float(fn(*tensors).data.reshape(-1)[0])
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * h)
    return grad


def gradcheck(fn, tensors, h=1e-5):
    """Relative error between analytic and numerical gradients.

    fn maps the given Tensors to a scalar Tensor; every input with
    requires_grad participates. The error is normalized by the largest
    gradient magnitude across all checked tensors, so directions with a
    genuinely zero derivative (pure finite-difference noise) do not
    divide by themselves.
    """
    for t in tensors:
        t.grad = None
    out = fn(*tensors)
    out.backward()
    max_diff = 0.0
    scale = 1e-8
    for i, t in enumerate(tensors):
        if not t.requires_grad:
            continue
        analytic = t.grad if t.grad is not None else np.zeros_like(t.data)
        numeric = numerical_gradient(fn, tensors, i, h)
        max_diff = max(max_diff, float(np.abs(analytic - numeric).max(initial=0.0)))
        scale = max(
            scale,
            float(np.abs(analytic).max(initial=0.0)),
            float(np.abs(numeric).max(initial=0.0)),
        )
    return max_diff / scale


def make_inputs(seed, *shapes, requires_grad=True, scale=1.0, offset=0.0):
    rng = np.random.default_rng(seed)
    return [
        Tensor(offset + scale * rng.standard_normal(s), requires_grad=requires_grad)
        for s in shapes
    ]
