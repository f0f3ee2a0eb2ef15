"""Evaluation suite: FID, Intra-FID, the cross-category transfer
downstream score, Diversity, 1-NNA and MPJPE.

All metrics are pure functions over immutable inputs; feature-based ones
operate on FeatureSet matrices produced by the trained feature extractor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from habitmotion import kernels
from habitmotion.errors import ConfigError, DomainError
from habitmotion.motion.motion import Motion
from habitmotion.nk.rng import rng_for
from habitmotion.transfer import TransferRequest, batch_transfer, eligible_targets

_EIG_DEGENERATE = 1e-10
_JITTER = 1e-10


@dataclass(frozen=True)
class FeatureSet:
    rows: np.ndarray  # (n, d)
    labels: tuple | None = None
    source: str = "real"

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        object.__setattr__(self, "rows", rows)
        if rows.ndim != 2:
            raise ConfigError(f"feature rows must be 2-D, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise ConfigError("non-finite feature rows")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))
            if len(self.labels) != rows.shape[0]:
                raise ConfigError("labels do not match feature rows")

    @property
    def n(self) -> int:
        return self.rows.shape[0]


def _rows(x) -> np.ndarray:
    return x.rows if isinstance(x, FeatureSet) else np.asarray(x, dtype=np.float64)


def _sqrt_psd(mat):
    vals, vecs = np.linalg.eigh(mat)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def fid(a, b) -> float:
    """Frechet distance between Gaussian fits of two feature sets:
    ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2).

    Unbiased covariance estimates; the matrix square root uses a
    symmetric eigendecomposition with eigenvalues floored at zero, a
    1e-10 jitter when the covariances are near-degenerate, and tiny
    negative results clamped to zero."""
    xa, xb = _rows(a), _rows(b)
    if xa.shape[0] < 2 or xb.shape[0] < 2:
        raise ConfigError("fid needs at least 2 rows on each side")
    if xa.shape[1] != xb.shape[1]:
        raise ConfigError(f"feature dims differ: {xa.shape[1]} vs {xb.shape[1]}")
    mu_a, mu_b = xa.mean(axis=0), xb.mean(axis=0)
    cov_a = np.cov(xa, rowvar=False, ddof=1)
    cov_b = np.cov(xb, rowvar=False, ddof=1)
    cov_a = np.atleast_2d(cov_a)
    cov_b = np.atleast_2d(cov_b)
    for cov in (cov_a, cov_b):
        vals = np.linalg.eigvalsh(cov)
        if vals.min() < _EIG_DEGENERATE:
            cov += _JITTER * np.eye(cov.shape[0])
    root_a = _sqrt_psd(cov_a)
    inner = _sqrt_psd(root_a @ cov_b @ root_a)
    diff = mu_a - mu_b
    value = float(diff @ diff + np.trace(cov_a) + np.trace(cov_b) - 2.0 * np.trace(inner))
    return max(value, 0.0)


def intra_fid(real: FeatureSet, generated: FeatureSet):
    """Per-category FID plus the unweighted mean.

    Categories with fewer than 2 rows on either side are excluded and
    reported; categories present on only one side are an error."""
    if real.labels is None or generated.labels is None:
        raise ConfigError("intra_fid needs labeled feature sets")
    real_cats = set(real.labels)
    gen_cats = set(generated.labels)
    if real_cats != gen_cats:
        only = sorted(real_cats.symmetric_difference(gen_cats))
        raise DomainError(f"categories present on one side only: {only}")
    per_cat, excluded = {}, []
    for cat in sorted(real_cats):
        ra = real.rows[np.array([l == cat for l in real.labels])]
        ga = generated.rows[np.array([l == cat for l in generated.labels])]
        if ra.shape[0] < 2 or ga.shape[0] < 2:
            excluded.append(cat)
            continue
        per_cat[cat] = fid(ra, ga)
    if not per_cat:
        raise DomainError("no category has at least 2 rows on both sides")
    mean = float(np.mean(list(per_cat.values())))
    return {"per_category": per_cat, "mean": mean, "excluded": excluded}


def diversity(features, pairs: int = 300, seed: int = 0) -> float:
    """Mean Euclidean distance over `pairs` seeded random pairs, drawn
    with replacement; a drawn pair with coinciding indices is resampled."""
    rows = _rows(features)
    if rows.shape[0] < 2:
        raise ConfigError("diversity needs at least 2 rows")
    rng = rng_for(seed, "diversity")
    idx = _draw_pairs(rng, rows.shape[0], pairs)
    return pair_mean_distance(rows, idx)


def _draw_pairs(rng, n, pairs):
    out = []
    while len(out) < pairs:
        i = int(rng.integers(0, n))
        j = int(rng.integers(0, n))
        if i == j:
            continue  # resample self-pairs
        out.append((i, j))
    return out


def pair_mean_distance(rows, idx_pairs) -> float:
    idx = np.asarray(idx_pairs, dtype=np.int64)
    d = rows[idx[:, 0]] - rows[idx[:, 1]]
    return float(np.sqrt((d * d).sum(axis=1)).mean())


def one_nna(s_g, s_r) -> float:
    """Leave-one-out 1-nearest-neighbour accuracy over the union of the
    two sets: the fraction of points whose nearest neighbour (never
    itself; Euclidean; ties resolve to the smaller global index in the
    concatenated ordering) belongs to their own set. 0.5 means the sets
    are indistinguishable."""
    xg, xr = _rows(s_g), _rows(s_r)
    if xg.shape[0] == 0 or xr.shape[0] == 0:
        raise ConfigError("one_nna needs non-empty sets")
    union = np.ascontiguousarray(np.concatenate([xg, xr], axis=0))
    n_g = xg.shape[0]
    d = kernels.sqdist(union, union)
    np.fill_diagonal(d, np.inf)
    nn = np.argmin(d, axis=1)  # first minimum = smallest index on ties
    own = (np.arange(union.shape[0]) < n_g) == (nn < n_g)
    return float(own.mean())


def mpjpe(a: Motion, b: Motion) -> float:
    """Mean per-joint position error in meters: FK positions per frame,
    averaged Euclidean distance over all frames and joints. Both motions
    integrate their root path from the origin (shared convention)."""
    if a.skeleton.joint_names != b.skeleton.joint_names or a.n_joints != b.n_joints:
        raise ConfigError("mpjpe requires the same skeleton")
    if a.n_frames != b.n_frames:
        raise ConfigError(f"frame counts differ: {a.n_frames} vs {b.n_frames}")
    xa = a.joint_positions()
    xb = b.joint_positions()
    return float(np.linalg.norm(xa - xb, axis=-1).mean())


def downstream_score(
    val_items,
    model,
    habit_models,
    store,
    extractor,
    min_samples: int = 5,
    real_items=None,
):
    """Cross-category transfer score: every validation motion is
    transferred to every other category with at least min_samples
    validation samples; transferred motions are grouped by target and
    compared to real motions of that category by FID. Returns the
    unweighted mean over targets plus the per-target values."""
    val_items = list(val_items)
    real_items = val_items if real_items is None else list(real_items)
    targets = eligible_targets(val_items, min_samples)
    requests = []
    for it in val_items:
        for tgt in targets:
            if tgt != it.motion.category:
                requests.append(TransferRequest(it.motion, tgt, source_id=it.name))
    if not requests:
        raise DomainError(
            f"no eligible target categories (min_samples={min_samples})"
        )
    result = batch_transfer(requests, model, habit_models, store)
    if result.errors:
        req, err = result.errors[0]
        raise DomainError(f"transfer failed for {req.source_id} -> {req.target}: {err}")
    by_target: dict = {}
    for m, row in zip(result.motions, result.manifest):
        by_target.setdefault(row.target_category, []).append(m)
    per_target = {}
    for tgt in targets:
        gen = by_target.get(tgt)
        if not gen:
            continue
        real = [it.motion for it in real_items if it.motion.category == tgt]
        gen_feats = extractor.features(gen)
        real_feats = extractor.features(real)
        per_target[tgt] = fid(gen_feats, real_feats)
    mean = float(np.mean(list(per_target.values())))
    return {"mean": mean, "per_target": per_target}
