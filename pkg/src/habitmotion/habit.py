"""Per-category habit encoders: a transformer posterior over a habit
latent and an affine-coupling normalizing-flow prior, trained jointly by
negative log-likelihood of posterior samples under the flow density.

One model is trained per observed category; at transfer time habit
latents come from the flow prior alone (no target motion exists, only
the label)."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from habitmotion.errors import ConfigError, SchemaError
from habitmotion.motion.motion import motion_to_features
from habitmotion.nk import tensor as T
from habitmotion.nk.checkpoint import (
    load_tensors,
    read_scalar_meta,
    save_scalar_meta,
    save_tensors,
)
from habitmotion.nk.layers import Init, Linear, Module, TransformerEncoder
from habitmotion.nk.optim import AdamW
from habitmotion.nk.rng import rng_for
from habitmotion.nk.tensor import Tensor

LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class HabitConfig:
    n_joints: int = 21
    latent_dim: int = 64
    post_layers: int = 4
    post_hidden: int = 512
    post_heads: int = 8
    flow_layers: int = 6
    flow_hidden: int = 128
    scale_max: float = 5.0
    sigma_floor: float = 0.01
    iterations: int = 2000
    batch_size: int = 32
    crop_frames: int = 0  # 0 trains on whole sequences
    lr: float = 1e-3
    weight_decay: float = 1e-4

    def __post_init__(self):
        if self.latent_dim < 2:
            raise ConfigError("habit latent needs at least 2 dimensions")
        if self.sigma_floor <= 0:
            raise ConfigError("sigma floor must be positive")


class _Coupling(Module):
    """One affine coupling layer; even layers transform the second half
    conditioned on the first, odd layers the reverse. The final net layer
    is zero-initialized so the flow starts at the identity."""

    def __init__(self, init, name, dim, hidden, scale_max, swap):
        self.dim = dim
        self.d1 = dim // 2
        self.swap = swap
        self.scale_max = scale_max
        d_keep = self.d1 if not swap else dim - self.d1
        d_trans = dim - d_keep
        self.d_trans = d_trans
        self.fc1 = Linear(init, f"{name}.fc1", d_keep, hidden)
        self.fc2 = Linear(init, f"{name}.fc2", hidden, hidden)
        self.fc3 = Linear(init, f"{name}.fc3", hidden, 2 * d_trans, zero_init=True)

    def _halves(self, x):
        if not self.swap:
            return x[:, : self.d1], x[:, self.d1 :]
        return x[:, self.d1 :], x[:, : self.d1]

    def _join(self, keep, trans):
        if not self.swap:
            return T.concat([keep, trans], axis=1)
        return T.concat([trans, keep], axis=1)

    def _scale_shift(self, keep):
        h = self.fc3(T.relu(self.fc2(T.relu(self.fc1(keep)))))
        s = T.tanh(h[:, : self.d_trans]) * self.scale_max
        t = h[:, self.d_trans :]
        return s, t

    def forward(self, x):
        keep, trans = self._halves(x)
        s, t = self._scale_shift(keep)
        return self._join(keep, trans * T.exp(s) + t), s.sum(axis=1)

    def inverse(self, y):
        keep, trans = self._halves(y)
        s, t = self._scale_shift(keep)
        return self._join(keep, (trans - t) * T.exp(-s)), -s.sum(axis=1)


class FlowPrior(Module):
    """Stack of alternating affine couplings over a standard-normal base."""

    def __init__(self, init, name, dim, layers, hidden, scale_max=5.0):
        self.dim = dim
        self.couplings = [
            _Coupling(init, f"{name}.cpl{i}", dim, hidden, scale_max, swap=bool(i % 2))
            for i in range(layers)
        ]

    def forward_t(self, w: Tensor):
        logdet = Tensor(np.zeros(w.data.shape[0]))
        z = w
        for c in self.couplings:
            z, ld = c.forward(z)
            if not np.all(np.isfinite(z.data)):
                raise FloatingPointError(
                    f"non-finite flow output in layer {self.couplings.index(c)}"
                )
            logdet = logdet + ld
        return z, logdet

    def inverse_t(self, z: Tensor):
        logdet = Tensor(np.zeros(z.data.shape[0]))
        w = z
        for i in range(len(self.couplings) - 1, -1, -1):
            w, ld = self.couplings[i].inverse(w)
            if not np.all(np.isfinite(w.data)):
                raise FloatingPointError(f"non-finite flow inverse in layer {i}")
            logdet = logdet + ld
        return w, logdet

    def log_prob_t(self, z: Tensor) -> Tensor:
        w, logdet_inv = self.inverse_t(z)
        base = (w * w).sum(axis=1) * (-0.5) - 0.5 * self.dim * LOG_2PI
        return base + logdet_inv

    # numpy convenience surface

    def _as_batch(self, v):
        v = np.asarray(v, dtype=np.float64)
        if v.ndim == 1:
            return v[None], True
        return v, False

    def forward(self, w):
        batch, single = self._as_batch(w)
        with T.no_grad():
            z, ld = self.forward_t(Tensor(batch))
        return (z.data[0], float(ld.data[0])) if single else (z.data, ld.data)

    def inverse(self, z):
        batch, single = self._as_batch(z)
        with T.no_grad():
            w, ld = self.inverse_t(Tensor(batch))
        return (w.data[0], float(ld.data[0])) if single else (w.data, ld.data)

    def log_prob(self, z):
        batch, single = self._as_batch(z)
        with T.no_grad():
            lp = self.log_prob_t(Tensor(batch))
        return float(lp.data[0]) if single else lp.data


def prior_loss(flow: FlowPrior, z: Tensor) -> Tensor:
    """Batch-mean negative log-likelihood under the flow (the training
    objective for the habit encoder)."""
    return -flow.log_prob_t(z).mean()


class HabitPosterior(Module):
    """Transformer encoder mapping a motion feature sequence to Gaussian
    posterior statistics (mu, sigma) with a softplus-plus-floor sigma."""

    def __init__(self, init, name, cfg: HabitConfig):
        self.cfg = cfg
        self.encoder = TransformerEncoder(
            init, f"{name}.enc", 7 * cfg.n_joints, cfg.post_hidden, cfg.post_heads, cfg.post_layers
        )
        self.mu_head = Linear(init, f"{name}.mu", cfg.post_hidden, cfg.latent_dim)
        self.sigma_head = Linear(init, f"{name}.sigma", cfg.post_hidden, cfg.latent_dim)

    def forward_t(self, x: Tensor):
        pooled = self.encoder(x)
        mu = self.mu_head(pooled)
        sigma = T.softplus(self.sigma_head(pooled)) + self.cfg.sigma_floor
        return mu, sigma

    def encode(self, features):
        """(T, 7N) -> (mu, sigma) numpy vectors."""
        f = np.asarray(features, dtype=np.float64)
        if f.ndim != 2 or f.shape[1] != 7 * self.cfg.n_joints:
            raise ConfigError(
                f"posterior expects (T, {7 * self.cfg.n_joints}) features, got {f.shape}"
            )
        with T.no_grad():
            mu, sigma = self.forward_t(Tensor(f[None]))
        return mu.data[0].copy(), sigma.data[0].copy()


def sample_posterior(mu, sigma, rng=None) -> Tensor:
    """Reparameterized draw z = mu + sigma * eps. Tensor inputs keep the
    graph (training); rng=None takes the deterministic eps=0 path."""
    mu_t = mu if isinstance(mu, Tensor) else Tensor(np.asarray(mu, dtype=np.float64))
    sigma_t = sigma if isinstance(sigma, Tensor) else Tensor(np.asarray(sigma, dtype=np.float64))
    if np.any(sigma_t.data <= 0):
        raise ConfigError("posterior sigma must be positive")
    if rng is None:
        eps = np.zeros_like(mu_t.data)
    else:
        eps = rng.standard_normal(mu_t.data.shape)
    return mu_t + sigma_t * Tensor(eps)


class HabitModel:
    """Trained per-category habit encoder: posterior + flow + metadata."""

    def __init__(self, category, cfg: HabitConfig, posterior, flow, iterations=0, final_nll=0.0):
        self.category = category
        self.cfg = cfg
        self.posterior = posterior
        self.flow = flow
        self.iterations = iterations
        self.final_nll = final_nll

    def sample_habit(self, mode="deterministic", seed=0) -> np.ndarray:
        """Habit latent from the flow prior: the image of a seeded
        standard-normal draw (stochastic) or of the origin (deterministic)."""
        if mode == "deterministic":
            w = np.zeros(self.cfg.latent_dim)
        elif mode == "stochastic":
            w = rng_for(seed, "habit-sample", self.category).standard_normal(self.cfg.latent_dim)
        else:
            raise ConfigError(f"unknown habit mode {mode!r}")
        z, _ = self.flow.forward(w)
        return z

    def save(self, path) -> None:
        entries = {}
        for p in self.posterior.parameters() + self.flow.parameters():
            entries[p.name] = p.data
        save_scalar_meta(
            entries,
            {
                "n_joints": self.cfg.n_joints,
                "latent_dim": self.cfg.latent_dim,
                "post_layers": self.cfg.post_layers,
                "post_hidden": self.cfg.post_hidden,
                "post_heads": self.cfg.post_heads,
                "flow_layers": self.cfg.flow_layers,
                "flow_hidden": self.cfg.flow_hidden,
                "scale_max": self.cfg.scale_max,
                "sigma_floor": self.cfg.sigma_floor,
                "iterations": self.iterations,
                "final_nll": self.final_nll,
            },
        )
        save_tensors(path, entries)

    @classmethod
    def load(cls, path, category=None) -> "HabitModel":
        if category is None:
            m = re.match(r"habit_(.+)\.hmck$", str(path).split("/")[-1])
            if not m:
                raise SchemaError(
                    f"{path}: cannot infer category; expected habit_<category>.hmck"
                )
            category = m.group(1)
        entries = load_tensors(path)
        meta = read_scalar_meta(entries)
        cfg = HabitConfig(
            n_joints=int(meta["n_joints"]),
            latent_dim=int(meta["latent_dim"]),
            post_layers=int(meta["post_layers"]),
            post_hidden=int(meta["post_hidden"]),
            post_heads=int(meta["post_heads"]),
            flow_layers=int(meta["flow_layers"]),
            flow_hidden=int(meta["flow_hidden"]),
            scale_max=float(meta["scale_max"]),
            sigma_floor=float(meta["sigma_floor"]),
        )
        model = build_habit_model(category, cfg, seed=0)
        for p in model.posterior.parameters() + model.flow.parameters():
            if p.name not in entries:
                raise SchemaError(f"{path}: missing parameter {p.name}")
            p.data = np.asarray(entries[p.name], dtype=np.float64).copy()
        model.iterations = int(meta["iterations"])
        model.final_nll = float(meta["final_nll"])
        return model


def build_habit_model(category, cfg: HabitConfig, seed) -> HabitModel:
    init = Init(seed)
    posterior = HabitPosterior(init, "post", cfg)
    flow = FlowPrior(init, "flow", cfg.latent_dim, cfg.flow_layers, cfg.flow_hidden, cfg.scale_max)
    return HabitModel(category, cfg, posterior, flow)


def train_habit(motions, cfg: HabitConfig, seed: int) -> HabitModel:
    """Jointly optimize posterior and flow on the prior NLL with
    reparameterized posterior samples. The sigma floor and AdamW weight
    decay act as posterior-collapse mitigation."""
    motions = list(motions)
    if not motions:
        raise ConfigError("habit training needs a non-empty corpus")
    category = motions[0].category
    for m in motions:
        if m.category != category:
            raise ConfigError(
                f"habit corpus mixes categories {category!r} and {m.category!r}"
            )
    feats = [motion_to_features(m) for m in motions]
    min_len = min(f.shape[0] for f in feats)
    feats = np.stack([f[:min_len] for f in feats])

    cat_seed = rng_for(seed, "habit", category).integers(0, 2**63 - 1)
    model = build_habit_model(category, cfg, seed=int(cat_seed))
    params = model.posterior.parameters() + model.flow.parameters()
    opt = AdamW(params, lr=cfg.lr, weight_decay=cfg.weight_decay)
    batch_rng = rng_for(seed, "habit", category, "batches")
    eps_rng = rng_for(seed, "habit", category, "eps")

    crop = cfg.crop_frames if 0 < cfg.crop_frames < min_len else 0
    final_nll = 0.0
    for _ in range(cfg.iterations):
        pick = batch_rng.integers(0, feats.shape[0], size=cfg.batch_size)
        if crop:
            starts = batch_rng.integers(0, min_len - crop + 1, size=cfg.batch_size)
            x = Tensor(np.stack([feats[p, s : s + crop] for p, s in zip(pick, starts)]))
        else:
            x = Tensor(feats[pick])
        mu, sigma = model.posterior.forward_t(x)
        z = sample_posterior(mu, sigma, eps_rng)
        loss = prior_loss(model.flow, z)
        T.backward(loss, params)
        opt.step()
        opt.zero_grad()
        final_nll = float(loss.data)
    model.iterations = cfg.iterations
    model.final_nll = final_nll
    return model


def fit_flow(samples, dim, layers=6, hidden=64, scale_max=5.0, iterations=1500, lr=1e-3,
             batch_size=128, seed=0) -> FlowPrior:
    """Fit a flow directly to data samples by NLL (no posterior); used by
    density-normalization checks and toy targets."""
    samples = np.asarray(samples, dtype=np.float64)
    init = Init(int(rng_for(seed, "fit-flow").integers(0, 2**63 - 1)))
    flow = FlowPrior(init, "flow", dim, layers, hidden, scale_max)
    params = flow.parameters()
    opt = AdamW(params, lr=lr)
    rng = rng_for(seed, "fit-flow", "batches")
    for _ in range(iterations):
        pick = rng.integers(0, samples.shape[0], size=min(batch_size, samples.shape[0]))
        loss = prior_loss(flow, Tensor(samples[pick]))
        T.backward(loss, params)
        opt.step()
        opt.zero_grad()
    return flow
