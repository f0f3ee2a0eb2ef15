"""Numeric kernel: tensors with reverse-mode autodiff, layers, losses,
the AdamW optimizer, checkpoints, and seeded random streams."""

from habitmotion.nk.tensor import (  # noqa: F401
    Parameter,
    Tensor,
    backward,
    concat,
    exp,
    index_rows,
    log,
    log_softmax,
    matmul,
    no_grad,
    relu,
    softmax,
    softplus,
    sqrt,
    straight_through,
    tanh,
)
from habitmotion.nk.losses import cross_entropy, mean_square, smooth_l1  # noqa: F401
from habitmotion.nk.optim import AdamW, NonFiniteGradientError, adamw_step  # noqa: F401
from habitmotion.nk.rng import rng_for  # noqa: F401
