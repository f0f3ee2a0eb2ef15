"""Motion VQ-VAE: CNN encoder/decoder over 7N-wide feature sequences, a
temperature-softmax quantizer against a learnable codebook, EMA codebook
updates with age-based code reset, and the joint training loop.

The decoder is conditioned on a per-category habit latent and a
256-dim text embedding, each passed through its own linear projection
and concatenated channel-wise with the quantized latents.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace

import numpy as np

from habitmotion import kernels
from habitmotion.errors import ConfigError, UnknownCategoryError
from habitmotion.motion.motion import motion_to_features
from habitmotion.nk import tensor as T
from habitmotion.nk.checkpoint import (
    load_tensors,
    read_scalar_meta,
    save_scalar_meta,
    save_tensors,
)
from habitmotion.nk.layers import Conv1d, Init, Linear, Module, ResBlock1d, upsample_nearest
from habitmotion.nk.losses import mean_square, smooth_l1
from habitmotion.nk.optim import AdamW
from habitmotion.nk.rng import rng_for
from habitmotion.nk.tensor import Tensor

DOWNSAMPLE_RATE = 4  # two stride-2 stages


@dataclass
class VqvaeConfig:
    n_joints: int = 21
    codebook_size: int = 512
    code_dim: int = 512
    width: int = 512
    cond_dim: int = 64
    habit_dim: int = 64
    text_dim: int = 256
    raw_embed_dim: int = 8
    tau: float = 0.5
    use_habit_encoder: bool = True
    use_text_encoder: bool = True
    # Sequences longer than this are encoded/decoded in windows of this
    # many frames (a multiple of the downsample rate, sized to the
    # training crop) so inference stays in the length regime the model
    # was trained on; the ceil(T/4) latent-length contract is preserved.
    inference_window: int = 12

    @property
    def n_features(self) -> int:
        return 7 * self.n_joints

    def __post_init__(self):
        if self.inference_window % DOWNSAMPLE_RATE != 0:
            raise ConfigError(
                f"inference_window must be a multiple of {DOWNSAMPLE_RATE}, "
                f"got {self.inference_window}"
            )


@dataclass
class TrainConfig:
    alpha: float = 0.5
    beta: float = 0.02
    ema_lambda: float = 0.99
    ema_eps: float = 1e-5
    batch_size: int = 32
    iterations: int = 200_000
    lr_initial: float = 2e-4
    lr_final: float = 1e-5
    crop_frames: int = 10
    resample_folds: int = 10
    quantizer_mode: str = "sample"
    reset_age: int = 256
    weight_decay: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ConfigError("alpha and beta must be non-negative")
        if not (0.0 <= self.ema_lambda <= 1.0):
            raise ConfigError("ema_lambda must lie in [0, 1]")
        if self.quantizer_mode not in ("sample", "argmax"):
            raise ConfigError(f"quantizer_mode must be sample or argmax, got {self.quantizer_mode}")


class Codebook:
    """K x d code matrix with EMA statistics and usage ages."""

    def __init__(self, codes, ema_cluster_size=None, ema_embed_sum=None, usage_age=None):
        self.codes = np.asarray(codes, dtype=np.float64)
        k = self.codes.shape[0]
        self.ema_cluster_size = (
            np.ones(k) if ema_cluster_size is None else np.asarray(ema_cluster_size, dtype=np.float64)
        )
        self.ema_embed_sum = (
            self.codes.copy() if ema_embed_sum is None else np.asarray(ema_embed_sum, dtype=np.float64)
        )
        self.usage_age = (
            np.zeros(k, dtype=np.int64) if usage_age is None else np.asarray(usage_age, dtype=np.int64)
        )

    @property
    def size(self) -> int:
        return self.codes.shape[0]

    @classmethod
    def initialize(cls, k, dim, seed):
        codes = rng_for(seed, "init", "codebook").normal(0.0, 1.0 / math.sqrt(dim), size=(k, dim))
        return cls(codes)


@dataclass
class QuantizeResult:
    fhat: np.ndarray  # (n, d)
    indices: np.ndarray  # (n,)
    probs: np.ndarray  # (n, K)


def quantize(f, codebook: Codebook, tau: float, mode: str = "sample", rng=None) -> QuantizeResult:
    """Soft quantization: squared distances to every code, softmax over
    -D/tau (max-subtracted for stability), then either a seeded sample or
    the argmax (ties resolve to the lowest index)."""
    if tau <= 0:
        raise ConfigError(f"quantizer temperature must be positive, got {tau}")
    f = np.asarray(f, dtype=np.float64)
    flat = f.reshape(-1, codebook.codes.shape[1])
    d = kernels.sqdist(np.ascontiguousarray(flat), codebook.codes)
    logits = -d / tau
    logits -= logits.max(axis=1, keepdims=True)
    p = np.exp(logits)
    p /= p.sum(axis=1, keepdims=True)
    if mode == "argmax":
        idx = np.argmax(p, axis=1)
    elif mode == "sample":
        if rng is None:
            raise ConfigError("sample mode needs a random generator")
        u = rng.random(flat.shape[0])
        cum = np.cumsum(p, axis=1)
        idx = np.minimum((cum < u[:, None]).sum(axis=1), codebook.size - 1)
    else:
        raise ConfigError(f"unknown quantizer mode {mode!r}")
    return QuantizeResult(codebook.codes[idx], idx.astype(np.int64), p)


def ema_update(codebook: Codebook, latents, indices, lam: float, eps: float = 1e-5) -> Codebook:
    """Exponential moving average of cluster sizes and embedding sums;
    codes become embed_sum / max(cluster_size, eps). Assigned codes get
    their age zeroed, unassigned ones age by one."""
    if not (0.0 <= lam <= 1.0):
        raise ConfigError(f"EMA constant must lie in [0, 1], got {lam}")
    latents = np.asarray(latents, dtype=np.float64)
    indices = np.asarray(indices, dtype=np.int64)
    k = codebook.size
    counts = np.bincount(indices, minlength=k).astype(np.float64)
    sums = np.zeros_like(codebook.ema_embed_sum)
    np.add.at(sums, indices, latents)
    codebook.ema_cluster_size = lam * codebook.ema_cluster_size + (1.0 - lam) * counts
    codebook.ema_embed_sum = lam * codebook.ema_embed_sum + (1.0 - lam) * sums
    codebook.codes = codebook.ema_embed_sum / np.maximum(codebook.ema_cluster_size, eps)[:, None]
    assigned = counts > 0
    codebook.usage_age[assigned] = 0
    codebook.usage_age[~assigned] += 1
    return codebook


def code_reset(codebook: Codebook, batch_latents, age_threshold: int, rng) -> Codebook:
    """Replace every code unused for >= age_threshold updates with a
    uniformly sampled latent from the current batch; its EMA stats reset
    to (1, code value) and its age to zero."""
    batch = np.asarray(batch_latents, dtype=np.float64)
    if batch.shape[0] == 0:
        raise ConfigError("code_reset needs a non-empty batch")
    stale = np.nonzero(codebook.usage_age >= age_threshold)[0]
    if stale.size == 0:
        return codebook
    picks = rng.integers(0, batch.shape[0], size=stale.size)
    codebook.codes[stale] = batch[picks]
    codebook.ema_cluster_size[stale] = 1.0
    codebook.ema_embed_sum[stale] = codebook.codes[stale]
    codebook.usage_age[stale] = 0
    return codebook


def batch_perplexity(indices, k: int) -> float:
    counts = np.bincount(np.asarray(indices), minlength=k).astype(np.float64)
    p = counts / counts.sum()
    nz = p[p > 0]
    return float(np.exp(-(nz * np.log(nz)).sum()))


def vq_loss(m, m_hat, f, f_hat, alpha: float, beta: float, n_joints: int) -> dict:
    """Reconstruction (smooth L1 on q channels plus alpha times smooth L1
    on v channels), embedding and commitment terms with the standard
    stop-gradient placement. Inputs are (B, 7N, T) motions and flattened
    latents; all terms use the mean-square convention."""
    nq = 4 * n_joints
    recon = smooth_l1(m_hat[:, :nq, :], m[:, :nq, :]) + alpha * smooth_l1(
        m_hat[:, nq:, :], m[:, nq:, :]
    )
    embedding = mean_square(f.detach() - f_hat)
    commitment = beta * mean_square(f - f_hat.detach())
    return {
        "total": recon + embedding + commitment,
        "reconstruction": recon,
        "embedding": embedding,
        "commitment": commitment,
    }


class _Encoder(Module):
    def __init__(self, init, cfg):
        w = cfg.width
        self.conv_in = Conv1d(init, "enc.in", cfg.n_features, w, 3)
        self.down1 = Conv1d(init, "enc.down1", w, w, 4, stride=2)
        self.res1 = ResBlock1d(init, "enc.res1", w, dilation=3)
        self.down2 = Conv1d(init, "enc.down2", w, w, 4, stride=2)
        self.res2 = ResBlock1d(init, "enc.res2", w, dilation=3)
        self.conv_out = Conv1d(init, "enc.out", w, cfg.code_dim, 3)

    def __call__(self, x):
        h = T.relu(self.conv_in(x))
        h = self.res1(self.down1(h))
        h = self.res2(self.down2(h))
        return self.conv_out(h)


class _Decoder(Module):
    def __init__(self, init, cfg):
        w = cfg.width
        d_in = cfg.code_dim + 2 * cfg.cond_dim
        self.conv_in = Conv1d(init, "dec.in", d_in, w, 3)
        self.res1 = ResBlock1d(init, "dec.res1", w, dilation=3)
        self.up1 = Conv1d(init, "dec.up1", w, w, 3)
        self.res2 = ResBlock1d(init, "dec.res2", w, dilation=3)
        self.up2 = Conv1d(init, "dec.up2", w, w, 3)
        self.conv_out = Conv1d(init, "dec.out", w, cfg.n_features, 3)

    def __call__(self, x):
        h = T.relu(self.conv_in(x))
        h = self.up1(upsample_nearest(self.res1(h), 2))
        h = self.up2(upsample_nearest(self.res2(h), 2))
        return self.conv_out(T.relu(h))


class VqvaeModel(Module):
    def __init__(self, cfg: VqvaeConfig, seed: int):
        init = Init(seed)
        self.cfg = cfg
        self.seed = int(seed)
        self.encoder = _Encoder(init, cfg)
        self.decoder = _Decoder(init, cfg)
        self.habit_proj = Linear(init, "cond.habit", cfg.habit_dim, cfg.cond_dim)
        self.text_proj = Linear(init, "cond.text", cfg.text_dim, cfg.cond_dim)
        self.embed_projection = Linear(init, "cond.remap", cfg.raw_embed_dim, cfg.text_dim)
        self.codebook = Codebook.initialize(cfg.codebook_size, cfg.code_dim, seed)

    # -- batched graph-building paths (training) -----------------------

    def encode_batch(self, x: Tensor) -> Tensor:
        """(B, 7N, T) -> (B, d_c, ceil(T/4))."""
        if x.data.shape[1] != self.cfg.n_features:
            raise ConfigError(
                f"feature width {x.data.shape[1]} does not match model ({self.cfg.n_features})"
            )
        return self.encoder(x)

    def conditioning(self, z_batch, g_batch, length: int) -> list:
        """Project habit latents (B, d_z) and text embeddings (B, 256),
        broadcast over the latent time axis. Disabled components
        contribute a zero channel of the same shape."""
        b = z_batch.shape[0] if z_batch is not None else g_batch.shape[0]
        ones = Tensor(np.ones((1, 1, length)))
        chans = []
        for flag, proj, vec in (
            (self.cfg.use_habit_encoder, self.habit_proj, z_batch),
            (self.cfg.use_text_encoder, self.text_proj, g_batch),
        ):
            if vec is None:
                raise ConfigError("conditioning vectors are mandatory decoder inputs")
            if flag:
                h = proj(vec if isinstance(vec, Tensor) else Tensor(vec))
                chans.append(h.reshape((b, self.cfg.cond_dim, 1)) * ones)
            else:
                chans.append(Tensor(np.zeros((b, self.cfg.cond_dim, length))))
        return chans

    def decode_batch(self, f_q: Tensor, z_batch, g_batch, n_frames: int) -> Tensor:
        """(B, d_c, L) plus conditioning -> (B, 7N, n_frames)."""
        b, _, length = f_q.data.shape
        cz, cg = self.conditioning(z_batch, g_batch, length)
        y = self.decoder(T.concat([f_q, cz, cg], axis=1))
        total = y.data.shape[2]
        lo = (total - n_frames) // 2
        return y[:, :, lo : lo + n_frames]

    # -- single-sequence inference surface ------------------------------

    def _encode_whole(self, f) -> np.ndarray:
        with T.no_grad():
            out = self.encode_batch(Tensor(f.T[None]))
        return out.data[0].T.copy()

    def encode(self, features) -> np.ndarray:
        """(T, 7N) feature sequence -> (ceil(T/4), d_c) latents.

        Sequences longer than the inference window are encoded window by
        window (the ragged tail re-encodes the final window and keeps
        only its trailing latents), matching the length regime the
        convolutions were trained on."""
        f = np.asarray(features, dtype=np.float64)
        if f.ndim != 2 or f.shape[1] != self.cfg.n_features:
            raise ConfigError(f"features must be (T, {self.cfg.n_features}), got {f.shape}")
        t = f.shape[0]
        w = self.cfg.inference_window
        if t <= w:
            return self._encode_whole(f)
        parts = [self._encode_whole(f[s : s + w]) for s in range(0, t - w + 1, w)]
        rem = t % w
        if rem:
            tail = self._encode_whole(f[t - w :])
            n_tail = -(-rem // DOWNSAMPLE_RATE)  # ceil(rem / rate)
            parts.append(tail[-n_tail:])
        return np.concatenate(parts, axis=0)

    def _decode_whole(self, fh, z_c, g_c, n_frames) -> np.ndarray:
        with T.no_grad():
            out = self.decode_batch(
                Tensor(fh.T[None]),
                np.asarray(z_c, dtype=np.float64)[None],
                np.asarray(g_c, dtype=np.float64)[None],
                n_frames,
            )
        return out.data[0].T.copy()

    def decode(self, fhat, z_c, g_c, n_frames: int) -> np.ndarray:
        """(L, d_c) quantized latents plus conditioning -> (n_frames, 7N),
        mirroring the windowing used by encode."""
        if z_c is None or g_c is None:
            raise ConfigError("decode requires both conditioning vectors")
        fh = np.asarray(fhat, dtype=np.float64)
        t = int(n_frames)
        w = self.cfg.inference_window
        lw = w // DOWNSAMPLE_RATE
        if t <= w:
            return self._decode_whole(fh, z_c, g_c, t)
        parts = [
            self._decode_whole(fh[i : i + lw], z_c, g_c, w)
            for i in range(0, fh.shape[0] - lw + 1, lw)
        ]
        rem = t % w
        if rem:
            tail = self._decode_whole(fh[-lw:], z_c, g_c, w)
            parts.append(tail[-rem:])
        return np.concatenate(parts, axis=0)

    def project_raw(self, raw) -> np.ndarray:
        """Raw text-embedding vector -> 256-dim remapped g_c."""
        raw = np.asarray(raw, dtype=np.float64)
        if raw.shape != (self.cfg.raw_embed_dim,):
            raise ConfigError(
                f"raw embedding dim {raw.shape} does not match model "
                f"({self.cfg.raw_embed_dim})"
            )
        with T.no_grad():
            out = self.embed_projection(Tensor(raw[None]))
        return out.data[0].copy()

    # -- persistence -----------------------------------------------------

    def save(self, path) -> None:
        entries = self.state_dict()
        entries["codebook.codes"] = self.codebook.codes
        entries["codebook.ema_cluster_size"] = self.codebook.ema_cluster_size
        entries["codebook.ema_embed_sum"] = self.codebook.ema_embed_sum
        entries["codebook.usage_age"] = self.codebook.usage_age.astype(np.float64)
        save_scalar_meta(
            entries,
            {
                "n_joints": self.cfg.n_joints,
                "codebook_size": self.cfg.codebook_size,
                "code_dim": self.cfg.code_dim,
                "width": self.cfg.width,
                "cond_dim": self.cfg.cond_dim,
                "habit_dim": self.cfg.habit_dim,
                "text_dim": self.cfg.text_dim,
                "raw_embed_dim": self.cfg.raw_embed_dim,
                "tau": self.cfg.tau,
                "use_habit_encoder": int(self.cfg.use_habit_encoder),
                "use_text_encoder": int(self.cfg.use_text_encoder),
                "inference_window": self.cfg.inference_window,
                "seed": self.seed,
            },
        )
        save_tensors(path, entries)

    @classmethod
    def load(cls, path) -> "VqvaeModel":
        entries = load_tensors(path)
        meta = read_scalar_meta(entries)
        cfg = VqvaeConfig(
            n_joints=int(meta["n_joints"]),
            codebook_size=int(meta["codebook_size"]),
            code_dim=int(meta["code_dim"]),
            width=int(meta["width"]),
            cond_dim=int(meta["cond_dim"]),
            habit_dim=int(meta["habit_dim"]),
            text_dim=int(meta["text_dim"]),
            raw_embed_dim=int(meta["raw_embed_dim"]),
            tau=float(meta["tau"]),
            use_habit_encoder=bool(int(meta["use_habit_encoder"])),
            use_text_encoder=bool(int(meta["use_text_encoder"])),
            inference_window=int(meta["inference_window"]),
        )
        model = cls(cfg, seed=int(meta["seed"]))
        model.load_state_dict(entries)
        model.codebook = Codebook(
            entries["codebook.codes"],
            entries["codebook.ema_cluster_size"],
            entries["codebook.ema_embed_sum"],
            entries["codebook.usage_age"].astype(np.int64),
        )
        return model


@dataclass
class TrainLogRow:
    iteration: int
    total: float
    reconstruction: float
    embedding: float
    commitment: float
    perplexity: float


@dataclass
class VqvaeTrainResult:
    model: VqvaeModel
    log: list = field(default_factory=list)


def write_train_log(path, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(
            ["iteration", "total", "reconstruction", "embedding", "commitment", "perplexity"]
        )
        for r in rows:
            writer.writerow(
                [r.iteration, repr(r.total), repr(r.reconstruction), repr(r.embedding),
                 repr(r.commitment), repr(r.perplexity)]
            )


def train_vqvae(
    model_cfg: VqvaeConfig,
    train_cfg: TrainConfig,
    corpus,
    habit_models: dict,
    store,
    log_path=None,
    checkpoint_path=None,
) -> VqvaeTrainResult:
    """Joint VQ-VAE training on cropped feature windows.

    Per iteration: a batch of crop_frames-long crops (each training
    sequence contributes resample_folds random crops with replacement per
    epoch pass), deterministic habit latents and projected text
    embeddings for each crop's category, encode -> quantize -> decode,
    AdamW on the VQ objective, then the EMA codebook update and age-based
    code reset. Fully determined by the seed."""
    train_items = corpus.split("train")
    if not train_items:
        raise ConfigError("corpus has no training items")
    seqs, cats = [], []
    for it in train_items:
        feats = motion_to_features(it.motion)
        if feats.shape[0] < train_cfg.crop_frames:
            raise ConfigError(
                f"{it.name}: sequence of {feats.shape[0]} frames is shorter than the "
                f"crop length {train_cfg.crop_frames}"
            )
        seqs.append(feats)
        cats.append(it.motion.category)
    for cat in corpus.categories:
        if model_cfg.use_habit_encoder and cat not in habit_models:
            raise UnknownCategoryError(cat)
        if cat not in store.labels():
            raise UnknownCategoryError(cat)

    # Inference windows track the training crop (rounded up to the
    # downsample rate) so transfer-time inputs match the trained regime.
    window = -(-train_cfg.crop_frames // DOWNSAMPLE_RATE) * DOWNSAMPLE_RATE
    model_cfg = replace(model_cfg, inference_window=window)
    model = VqvaeModel(model_cfg, seed=train_cfg.seed)

    # Deterministic habit latent per category (joint-training convention).
    z_by_cat = {}
    for cat in corpus.categories:
        if model_cfg.use_habit_encoder:
            z_by_cat[cat] = habit_models[cat].sample_habit(mode="deterministic")
        else:
            z_by_cat[cat] = np.zeros(model_cfg.habit_dim)
    raw_by_cat = {cat: store.raw_vector(cat) for cat in corpus.categories}

    params = model.parameters()
    opt = AdamW(params, lr=train_cfg.lr_initial, weight_decay=train_cfg.weight_decay)
    crop_rng = rng_for(train_cfg.seed, "vqvae", "crops")
    quant_rng = rng_for(train_cfg.seed, "vqvae", "quantizer")
    reset_rng = rng_for(train_cfg.seed, "vqvae", "reset")

    def new_pool():
        pool = []
        for si, feats in enumerate(seqs):
            hi = feats.shape[0] - train_cfg.crop_frames
            starts = crop_rng.integers(0, hi + 1, size=train_cfg.resample_folds)
            pool.extend((si, int(s)) for s in starts)
        order = crop_rng.permutation(len(pool))
        return [pool[i] for i in order]

    pool = new_pool()
    log = []
    half = train_cfg.iterations // 2
    nq = model_cfg.n_features  # channel count, for clarity below
    tcrop = train_cfg.crop_frames
    for it in range(1, train_cfg.iterations + 1):
        batch = []
        while len(batch) < train_cfg.batch_size:
            if not pool:
                pool = new_pool()
            batch.append(pool.pop())
        x = np.stack([seqs[si][s : s + tcrop] for si, s in batch])  # (B, T, 7N)
        x = np.ascontiguousarray(np.swapaxes(x, 1, 2))  # (B, 7N, T)
        batch_cats = [cats[si] for si, _ in batch]
        z_batch = np.stack([z_by_cat[c] for c in batch_cats])
        raw_batch = np.stack([raw_by_cat[c] for c in batch_cats])

        opt.lr = train_cfg.lr_initial if it <= half else train_cfg.lr_final
        m_in = Tensor(x)
        f = model.encode_batch(m_in)  # (B, d_c, L)
        b, dc, latlen = f.data.shape
        f_flat = f.transpose((0, 2, 1)).reshape((b * latlen, dc))
        qr = quantize(
            f_flat.data, model.codebook, model_cfg.tau, train_cfg.quantizer_mode, quant_rng
        )
        f_hat = Tensor(qr.fhat)
        f_q = T.straight_through(f_flat, f_hat)
        f_q = f_q.reshape((b, latlen, dc)).transpose((0, 2, 1))
        g_batch = model.embed_projection(Tensor(raw_batch))
        m_out = model.decode_batch(f_q, Tensor(z_batch), g_batch, tcrop)
        losses = vq_loss(
            m_in, m_out, f_flat, f_hat, train_cfg.alpha, train_cfg.beta, model_cfg.n_joints
        )
        T.backward(losses["total"], params)
        opt.step()
        opt.zero_grad()

        ema_update(model.codebook, f_flat.data, qr.indices, train_cfg.ema_lambda, train_cfg.ema_eps)
        code_reset(model.codebook, f_flat.data, train_cfg.reset_age, reset_rng)

        log.append(
            TrainLogRow(
                it,
                float(losses["total"].data),
                float(losses["reconstruction"].data),
                float(losses["embedding"].data),
                float(losses["commitment"].data),
                batch_perplexity(qr.indices, model_cfg.codebook_size),
            )
        )

    if log_path is not None:
        write_train_log(log_path, log)
    if checkpoint_path is not None:
        model.save(checkpoint_path)
    return VqvaeTrainResult(model=model, log=log)


def corpus_perplexity(model: VqvaeModel, corpus, split=None) -> float:
    """Argmax-assignment perplexity of the codebook over a whole corpus."""
    items = corpus.items if split is None else corpus.split(split)
    all_idx = []
    for it in items:
        f = model.encode(motion_to_features(it.motion))
        qr = quantize(f, model.codebook, model.cfg.tau, "argmax")
        all_idx.append(qr.indices)
    return batch_perplexity(np.concatenate(all_idx), model.cfg.codebook_size)


def desk_config(n_joints=21, raw_embed_dim=8, **overrides) -> tuple:
    """Desk-scale defaults: small codebook and width, 4000 iterations."""
    mc = VqvaeConfig(
        n_joints=n_joints,
        codebook_size=64,
        code_dim=64,
        width=64,
        habit_dim=16,
        raw_embed_dim=raw_embed_dim,
    )
    tc = TrainConfig(iterations=4000, **overrides)
    return mc, tc


def paper_config(n_joints=21, raw_embed_dim=8, **overrides) -> tuple:
    mc = VqvaeConfig(n_joints=n_joints, raw_embed_dim=raw_embed_dim)
    tc = TrainConfig(**overrides)
    return mc, tc


def replace_config(cfg, **kwargs):
    return replace(cfg, **kwargs)
