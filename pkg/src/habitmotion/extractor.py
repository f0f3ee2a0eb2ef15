"""Motion feature extractor: a transformer category classifier whose
penultimate pooled layer (256 dims) supplies the features for all
feature-space metrics. Frozen after training; identical checkpoints give
identical features."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

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
from habitmotion.nk.losses import cross_entropy
from habitmotion.nk.optim import AdamW
from habitmotion.nk.rng import rng_for
from habitmotion.nk.tensor import Tensor

FEATURE_DIM = 256


@dataclass
class ExtractorConfig:
    n_joints: int = 21
    hidden: int = 128
    heads: int = 8
    layers: int = 4
    lr: float = 1e-3
    batch_size: int = 16
    max_iterations: int = 3000
    plateau_iterations: int = 200
    eval_every: int = 10


class FeatureExtractor(Module):
    def __init__(self, cfg: ExtractorConfig, labels, seed: int, corpus_hash: int = 0):
        if len(labels) < 2:
            raise ConfigError("feature extractor needs at least 2 categories")
        init = Init(seed)
        self.cfg = cfg
        self.labels = tuple(sorted(labels))
        self.seed = int(seed)
        self.corpus_hash = int(corpus_hash)
        self.encoder = TransformerEncoder(
            init, "fx.enc", 7 * cfg.n_joints, cfg.hidden, cfg.heads, cfg.layers
        )
        self.feat_head = Linear(init, "fx.feat", cfg.hidden, FEATURE_DIM)
        self.cls_head = Linear(init, "fx.cls", FEATURE_DIM, len(self.labels))

    def _feats_t(self, x: Tensor) -> Tensor:
        return T.relu(self.feat_head(self.encoder(x)))

    def logits_t(self, x: Tensor) -> Tensor:
        return self.cls_head(self._feats_t(x))

    def features(self, motions) -> np.ndarray:
        """(n motions) -> (n, 256) pooled penultimate-layer features."""
        rows = []
        with T.no_grad():
            for m in motions:
                f = motion_to_features(m)
                rows.append(self._feats_t(Tensor(f[None])).data[0])
        return np.stack(rows)

    def classify(self, motions):
        """Predicted category labels."""
        out = []
        with T.no_grad():
            for m in motions:
                logits = self.logits_t(Tensor(motion_to_features(m)[None])).data[0]
                out.append(self.labels[int(np.argmax(logits))])
        return out

    def accuracy(self, motions, true_labels) -> float:
        pred = self.classify(motions)
        return float(np.mean([p == t for p, t in zip(pred, true_labels)]))

    def save(self, path) -> None:
        entries = self.state_dict()
        save_scalar_meta(
            entries,
            {
                "n_joints": self.cfg.n_joints,
                "hidden": self.cfg.hidden,
                "heads": self.cfg.heads,
                "layers": self.cfg.layers,
                "n_labels": len(self.labels),
                "seed": self.seed,
                "corpus_hash": self.corpus_hash,
            },
        )
        save_tensors(path, entries)
        with open(str(path) + ".labels.json", "w", encoding="utf-8") as f:
            json.dump({"labels": list(self.labels)}, f, sort_keys=True)
            f.write("\n")

    @classmethod
    def load(cls, path) -> "FeatureExtractor":
        entries = load_tensors(path)
        meta = read_scalar_meta(entries)
        try:
            with open(str(path) + ".labels.json", "r", encoding="utf-8") as f:
                labels = json.load(f)["labels"]
        except FileNotFoundError as e:
            raise SchemaError(f"{path}: missing labels sidecar") from e
        if len(labels) != int(meta["n_labels"]):
            raise SchemaError(f"{path}: label sidecar does not match checkpoint")
        cfg = ExtractorConfig(
            n_joints=int(meta["n_joints"]),
            hidden=int(meta["hidden"]),
            heads=int(meta["heads"]),
            layers=int(meta["layers"]),
        )
        model = cls(cfg, labels, seed=int(meta["seed"]), corpus_hash=int(meta["corpus_hash"]))
        model.load_state_dict(entries)
        return model


def corpus_fingerprint(items) -> int:
    doc = [(it.name, it.motion.category, it.motion.n_frames) for it in items]
    digest = hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).digest()
    return int.from_bytes(digest[:8], "little", signed=False) >> 1


def train_feature_extractor(corpus, seed: int, cfg: ExtractorConfig | None = None) -> FeatureExtractor:
    """Train the category classifier to a validation-accuracy plateau
    (no improvement over plateau_iterations) and restore the best
    parameters; deterministic per seed."""
    cfg = cfg or ExtractorConfig(n_joints=corpus.skeleton.n_joints)
    labels = corpus.categories
    if len(labels) < 2:
        raise ConfigError("feature extractor training needs at least 2 categories")
    label_index = {c: i for i, c in enumerate(sorted(labels))}

    train_items = corpus.split("train")
    val_items = corpus.split("val") or train_items
    feats = [motion_to_features(it.motion) for it in train_items]
    min_len = min(f.shape[0] for f in feats)
    feats = np.stack([f[:min_len] for f in feats])
    ys = np.array([label_index[it.motion.category] for it in train_items])
    val_motions = [it.motion for it in val_items]
    val_labels = [it.motion.category for it in val_items]

    model = FeatureExtractor(
        cfg, labels, seed=seed, corpus_hash=corpus_fingerprint(corpus.items)
    )
    params = model.parameters()
    opt = AdamW(params, lr=cfg.lr)
    rng = rng_for(seed, "extractor", "batches")

    best_acc = -1.0
    best_state = None
    best_iter = 0
    for it in range(1, cfg.max_iterations + 1):
        pick = rng.integers(0, feats.shape[0], size=cfg.batch_size)
        loss = cross_entropy(model.logits_t(Tensor(feats[pick])), ys[pick])
        T.backward(loss, params)
        opt.step()
        opt.zero_grad()
        if it % cfg.eval_every == 0:
            acc = model.accuracy(val_motions, val_labels)
            if acc > best_acc:
                best_acc = acc
                best_state = {p.name: p.data.copy() for p in params}
                best_iter = it
            elif it - best_iter >= cfg.plateau_iterations:
                break
    if best_state is not None:
        model.load_state_dict(best_state)
    return model
