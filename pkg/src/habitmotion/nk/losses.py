"""Loss functions."""

import numpy as np

from habitmotion.nk import tensor as T
from habitmotion.nk.tensor import Tensor


def smooth_l1(pred: Tensor, target: Tensor, threshold: float = 1.0) -> Tensor:
    """Mean smoothed L1: 0.5*d^2/threshold inside |d| < threshold,
    |d| - 0.5*threshold outside."""
    if pred.data.shape != target.data.shape:
        raise ValueError(
            f"smooth_l1 shape mismatch: {pred.data.shape} vs {target.data.shape}"
        )
    if threshold <= 0:
        raise ValueError("smooth_l1 threshold must be positive")
    d = pred.data - target.data
    absd = np.abs(d)
    inner = absd < threshold
    vals = np.where(inner, 0.5 * d * d / threshold, absd - 0.5 * threshold)
    out = np.asarray(vals.mean())
    n = d.size

    def bwd(g):
        gd = np.where(inner, d / threshold, np.sign(d)) * (g / n)
        if pred.requires_grad:
            pred._acc(gd)
        if target.requires_grad:
            target._acc(-gd)

    return T._from_op(out, (pred, target), bwd)


def mean_square(a: Tensor) -> Tensor:
    """Mean of elementwise squares (the spec's mean-square norm convention)."""
    return (a * a).mean()


def cross_entropy(logits: Tensor, labels) -> Tensor:
    """Mean negative log-likelihood of integer labels under softmax logits."""
    labels = np.asarray(labels, dtype=np.int64)
    logp = T.log_softmax(logits, axis=-1)
    picked = logp[(np.arange(labels.shape[0]), labels)]
    return -picked.mean()
