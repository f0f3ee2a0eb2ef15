"""AdamW optimizer (decoupled weight decay)."""

import numpy as np


class NonFiniteGradientError(RuntimeError):
    pass


class AdamW:
    def __init__(self, params, lr, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.0):
        if eps <= 0:
            raise ValueError("epsilon must be positive")
        if not (0.0 < betas[0] < 1.0 and 0.0 < betas[1] < 1.0):
            raise ValueError(f"betas must lie in (0, 1), got {betas}")
        if lr <= 0:
            if lr < 0:
                raise ValueError("learning rate must be non-negative")
        self.params = list(params)
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ValueError("duplicate parameter names in optimizer")
        self.lr = float(lr)
        self.betas = (float(betas[0]), float(betas[1]))
        self.eps = float(eps)
        self.weight_decay = float(weight_decay)
        self.step_count = 0
        self.m = {p.name: np.zeros_like(p.data) for p in self.params}
        self.v = {p.name: np.zeros_like(p.data) for p in self.params}

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        # Validate every gradient before touching any parameter so a bad
        # step aborts atomically.
        for p in self.params:
            if p.grad is None:
                raise NonFiniteGradientError(f"gradient not populated for {p.name}")
            if not np.all(np.isfinite(p.grad)):
                raise NonFiniteGradientError(f"non-finite gradient for {p.name}")
        self.step_count += 1
        b1, b2 = self.betas
        bc1 = 1.0 - b1**self.step_count
        bc2 = 1.0 - b2**self.step_count
        for p in self.params:
            m = self.m[p.name]
            v = self.v[p.name]
            g = p.grad
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            if self.weight_decay:
                p.data = p.data - self.lr * (update + self.weight_decay * p.data)
            else:
                p.data = p.data - self.lr * update


def adamw_step(optimizer: AdamW) -> None:
    """Apply one optimizer step (and bump the step counter)."""
    optimizer.step()
