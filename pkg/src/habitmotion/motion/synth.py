"""Synthetic quadruped gait corpus.

Each category is a parameter set over one shared 21-joint skeleton: limb
joints oscillate as amplitude * sin(2*pi*freq*t/fps + phase) around a
category-specific resting angle, and the root translates forward by the
stride scale. Resting angles are the category "habit": they separate
categories even when gait frequency and amplitude overlap. A matching
synthetic text-embedding table is derived from the same parameters so
embedding distances mirror behavioural similarity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from habitmotion.errors import ConfigError, SchemaError
from habitmotion.motion import quat
from habitmotion.motion.kinematics import compute_velocities, fk_sequence
from habitmotion.motion.motion import Motion, load_motion, save_motion
from habitmotion.motion.skeleton import LIMBS, Skeleton, reference_skeleton
from habitmotion.nk.rng import rng_for

FPS = 30.0

# Intra-limb phase lag, proximal to distal.
_LIMB_LAG = (0.0, 0.6, 1.2)
# Oscillation axes: legs and spine pitch about +z, tail wags about +y.
_AXIS_Z = np.array([0.0, 0.0, 1.0])
_AXIS_Y = np.array([0.0, 1.0, 0.0])


@dataclass(frozen=True)
class CategoryParams:
    """Gait description for one category over the reference skeleton."""

    label: str
    gait_freq_hz: float
    limb_phases: np.ndarray  # (4,) radians for lf, rf, lh, rh
    bend_amplitudes: np.ndarray  # (N,) radians
    resting_offsets: np.ndarray  # (N,) radians
    stride_scale: float  # meters advanced per gait cycle

    def __post_init__(self):
        object.__setattr__(self, "limb_phases", np.asarray(self.limb_phases, dtype=np.float64))
        object.__setattr__(
            self, "bend_amplitudes", np.asarray(self.bend_amplitudes, dtype=np.float64)
        )
        object.__setattr__(
            self, "resting_offsets", np.asarray(self.resting_offsets, dtype=np.float64)
        )
        if self.gait_freq_hz <= 0:
            raise ConfigError(f"{self.label}: gait frequency must be positive")
        if np.any(self.bend_amplitudes < 0):
            raise ConfigError(f"{self.label}: bend amplitudes must be non-negative")


def make_params(
    label,
    freq,
    phases,
    stride,
    hip_amp,
    knee_amp,
    foot_amp,
    hip_rest,
    knee_rest,
    foot_rest,
    spine_amp=0.04,
    tail_amp=0.15,
    n_joints=21,
) -> CategoryParams:
    """Expand compact per-group gait values to per-joint arrays."""
    amps = np.zeros(n_joints)
    rests = np.zeros(n_joints)
    for limb in LIMBS.values():
        hip, knee, foot = limb
        amps[hip], amps[knee], amps[foot] = hip_amp, knee_amp, foot_amp
        rests[hip], rests[knee], rests[foot] = hip_rest, knee_rest, foot_rest
    amps[1] = amps[2] = spine_amp  # spine
    amps[3] = amps[4] = spine_amp * 0.5  # neck, head
    amps[5] = amps[6] = amps[7] = tail_amp  # tail
    return CategoryParams(label, freq, np.asarray(phases, dtype=np.float64), amps, rests, stride)


# Gait vocabulary: phase patterns for the four limbs (lf, rf, lh, rh).
_PI = np.pi
_TROT = (0.0, _PI, _PI, 0.0)
_PACE = (0.0, _PI, 0.0, _PI)
_WALK = (0.0, _PI, 0.5 * _PI, 1.5 * _PI)
_AMBLE = (0.0, _PI, 0.3 * _PI, 1.3 * _PI)

# label: (freq, phases, stride, hip/knee/foot amplitude, hip/knee/foot rest)
_CATEGORY_TABLE = {
    "horse": (1.4, _TROT, 0.60, (0.32, 0.24, 0.18), (-0.05, 0.10, -0.05)),
    "cat": (1.5, _WALK, 0.42, (0.30, 0.30, 0.24), (-0.45, 0.75, -0.50)),
    "elephant": (1.3, _AMBLE, 0.55, (0.24, 0.18, 0.14), (0.32, -0.28, 0.24)),
    "dog": (1.7, _TROT, 0.45, (0.34, 0.28, 0.22), (-0.25, 0.40, -0.30)),
    "wolf": (1.6, _TROT, 0.50, (0.33, 0.27, 0.21), (-0.22, 0.36, -0.26)),
    "fox": (1.9, _WALK, 0.38, (0.31, 0.29, 0.24), (-0.30, 0.48, -0.34)),
    "deer": (1.5, _TROT, 0.55, (0.30, 0.22, 0.17), (-0.10, 0.16, -0.10)),
    "moose": (1.2, _TROT, 0.62, (0.27, 0.20, 0.15), (0.02, 0.05, 0.00)),
    "bear": (1.1, _PACE, 0.48, (0.26, 0.21, 0.16), (0.18, -0.12, 0.12)),
    "bull": (1.2, _WALK, 0.52, (0.25, 0.19, 0.14), (0.12, -0.06, 0.08)),
    "cow": (1.0, _WALK, 0.50, (0.23, 0.18, 0.13), (0.15, -0.10, 0.10)),
    "goat": (1.8, _TROT, 0.40, (0.29, 0.24, 0.19), (-0.15, 0.24, -0.16)),
    "sheep": (1.6, _AMBLE, 0.42, (0.26, 0.21, 0.16), (-0.08, 0.12, -0.08)),
    "pig": (1.4, _PACE, 0.40, (0.24, 0.19, 0.14), (0.08, -0.02, 0.05)),
    "zebra": (1.25, _AMBLE, 0.55, (0.24, 0.18, 0.14), (0.32, -0.28, 0.24)),
    "lion": (1.3, _WALK, 0.50, (0.31, 0.27, 0.22), (-0.35, 0.55, -0.38)),
    "tiger": (1.4, _WALK, 0.52, (0.32, 0.28, 0.23), (-0.38, 0.60, -0.42)),
    "leopard": (1.6, _WALK, 0.46, (0.32, 0.29, 0.24), (-0.40, 0.65, -0.45)),
    "rabbit": (2.2, _PACE, 0.30, (0.35, 0.33, 0.28), (-0.55, 0.90, -0.60)),
    "camel": (1.1, _PACE, 0.58, (0.27, 0.20, 0.15), (0.06, 0.04, 0.02)),
    "rhino": (1.0, _AMBLE, 0.54, (0.22, 0.17, 0.12), (0.26, -0.20, 0.18)),
}

# Embedding-only entries for exercising unseen-category retrieval; okapi
# behaves like a horse with slightly longer strides.
_UNSEEN_TABLE = {
    "okapi": (1.35, _TROT, 0.62, (0.31, 0.23, 0.17), (-0.04, 0.11, -0.06)),
}

# Curated coarse behavioural descriptors standing in for LLM-derived text
# embeddings: size, weight, speed, leg length, agility, stockiness,
# springiness, ground impact (all in [0, 1]). Deliberate property of the
# set: horse and zebra collide up to 1e-3 (their coarse descriptions are
# the same animal to a text encoder) while their joint habits in the gait
# table differ, so the text channel alone cannot separate them. Okapi
# sits 2e-4 from horse, strictly nearer than any other category.
_TEXT_ATTRIBUTES = {
    "horse": (0.80, 0.72, 0.82, 0.90, 0.35, 0.30, 0.45, 0.65),
    "zebra": (0.801, 0.72, 0.82, 0.90, 0.35, 0.30, 0.45, 0.65),
    "okapi": (0.80, 0.7202, 0.82, 0.90, 0.35, 0.30, 0.45, 0.65),
    "cat": (0.15, 0.08, 0.55, 0.35, 0.92, 0.25, 0.95, 0.10),
    "dog": (0.35, 0.30, 0.60, 0.55, 0.75, 0.40, 0.70, 0.30),
    "wolf": (0.40, 0.35, 0.65, 0.60, 0.78, 0.38, 0.72, 0.33),
    "fox": (0.22, 0.15, 0.58, 0.50, 0.85, 0.30, 0.80, 0.18),
    "deer": (0.55, 0.40, 0.78, 0.85, 0.70, 0.25, 0.85, 0.40),
    "moose": (0.90, 0.85, 0.60, 0.95, 0.30, 0.55, 0.40, 0.80),
    "bear": (0.75, 0.80, 0.45, 0.55, 0.45, 0.85, 0.35, 0.85),
    "bull": (0.85, 0.90, 0.50, 0.60, 0.25, 0.80, 0.25, 0.90),
    "cow": (0.82, 0.88, 0.35, 0.58, 0.15, 0.78, 0.15, 0.88),
    "goat": (0.35, 0.28, 0.55, 0.55, 0.80, 0.45, 0.82, 0.28),
    "sheep": (0.40, 0.35, 0.45, 0.50, 0.45, 0.65, 0.50, 0.35),
    "pig": (0.45, 0.50, 0.40, 0.30, 0.35, 0.90, 0.30, 0.55),
    "elephant": (1.00, 1.00, 0.45, 0.80, 0.10, 0.85, 0.12, 0.98),
    "lion": (0.60, 0.55, 0.75, 0.60, 0.85, 0.50, 0.88, 0.45),
    "tiger": (0.65, 0.60, 0.78, 0.62, 0.88, 0.52, 0.90, 0.48),
    "leopard": (0.50, 0.42, 0.80, 0.58, 0.95, 0.40, 0.95, 0.35),
    "rabbit": (0.08, 0.05, 0.65, 0.40, 0.90, 0.35, 1.00, 0.05),
    "camel": (0.85, 0.75, 0.55, 0.95, 0.25, 0.45, 0.30, 0.70),
    "rhino": (0.95, 0.98, 0.42, 0.55, 0.10, 0.95, 0.10, 0.96),
}


def category_params(label: str) -> CategoryParams:
    table = {**_CATEGORY_TABLE, **_UNSEEN_TABLE}
    if label not in table:
        raise ConfigError(f"no synthetic gait parameters for category {label!r}")
    freq, phases, stride, amps, rests = table[label]
    return make_params(label, freq, phases, stride, *amps, *rests)


def synth_generate(params: CategoryParams, skeleton: Skeleton, n_frames: int, seed: int) -> Motion:
    """Deterministic gait synthesis; identical (params, seed) inputs give
    identical motions. The seed drives a per-sequence phase shift and mild
    frequency/amplitude jitter for intra-category variety."""
    if n_frames < 2:
        raise ConfigError(f"need at least 2 frames, got {n_frames}")
    n = skeleton.n_joints
    gen = rng_for(seed, "synth", params.label)
    phase_start = gen.uniform(0.0, 2.0 * np.pi)
    freq = params.gait_freq_hz * gen.uniform(0.92, 1.08)
    amp_mult = gen.uniform(0.90, 1.10)

    t = np.arange(n_frames)[:, None]
    phases = np.zeros(n)
    for limb_idx, joints in enumerate(LIMBS.values()):
        for depth, j in enumerate(joints):
            phases[j] = params.limb_phases[limb_idx] + _LIMB_LAG[depth]
    omega = 2.0 * np.pi * freq / FPS
    angles = (
        params.bend_amplitudes[None, :] * amp_mult * np.sin(omega * t + phases[None, :] + phase_start)
        + params.resting_offsets[None, :]
    )

    axes = np.tile(_AXIS_Z, (n, 1))
    for j in (5, 6, 7):  # tail wags laterally
        axes[j] = _AXIS_Y
    quats = quat.from_axis_angle(axes[None, :, :], angles)
    quats = quat.hemisphere(quats)

    roots = np.zeros((n_frames, 3))
    roots[:, 0] = params.stride_scale * freq / FPS * np.arange(n_frames)
    roots[:, 1] = 0.02 * amp_mult * np.sin(2.0 * omega * np.arange(n_frames) + 2.0 * phase_start)

    x = fk_sequence(skeleton, quats, roots)
    return Motion(skeleton, quats, compute_velocities(x), params.label, FPS)


# -- corpus profiles and on-disk layout ----------------------------------

PROFILES = {
    "3cat": {
        "categories": ("horse", "zebra", "cat"),
        "unseen": ("okapi",),
        "sequences": 20,
        "frames": 40,
    },
    "21cat": {
        "categories": tuple(sorted(_CATEGORY_TABLE)),
        "unseen": ("okapi",),
        "sequences": 6,
        "frames": 40,
    },
}


def category_embedding(label: str) -> np.ndarray:
    """8-dim synthetic stand-in for an LLM-description text embedding."""
    if label not in _TEXT_ATTRIBUTES:
        raise ConfigError(f"no synthetic text embedding for category {label!r}")
    return np.asarray(_TEXT_ATTRIBUTES[label], dtype=np.float64)


def build_corpus(profile: str, out_dir, seed: int) -> dict:
    """Write a labeled synthetic corpus: motions/<cat>_<idx>.json, an
    embeddings.json store, and a corpus.json manifest with the
    deterministic train/val split (last quarter of each category)."""
    from pathlib import Path

    if profile not in PROFILES:
        raise ConfigError(f"unknown corpus profile {profile!r} (have {sorted(PROFILES)})")
    spec = PROFILES[profile]
    out = Path(out_dir)
    (out / "motions").mkdir(parents=True, exist_ok=True)
    skeleton = reference_skeleton()
    n_seq = spec["sequences"]
    n_val = max(1, round(0.25 * n_seq))
    files = []
    for cat in spec["categories"]:
        params = category_params(cat)
        for i in range(n_seq):
            m = synth_generate(params, skeleton, spec["frames"], seed=hash_seed(seed, cat, i))
            name = f"{cat}_{i:03d}.json"
            save_motion(m, out / "motions" / name)
            files.append(
                {
                    "file": f"motions/{name}",
                    "category": cat,
                    "split": "val" if i >= n_seq - n_val else "train",
                }
            )
    entries = {}
    for cat in spec["categories"]:
        entries[cat] = {
            "vector": [float(v) for v in category_embedding(cat)],
            "source": "synthetic",
            "observed": True,
        }
    for cat in spec["unseen"]:
        entries[cat] = {
            "vector": [float(v) for v in category_embedding(cat)],
            "source": "synthetic",
            "observed": False,
        }
    store_doc = {"format_version": 1, "dim": 8, "entries": entries}
    with open(out / "embeddings.json", "w", encoding="utf-8") as f:
        json.dump(store_doc, f, indent=1, sort_keys=True)
        f.write("\n")
    manifest = {
        "format_version": 1,
        "profile": profile,
        "seed": int(seed),
        "fps": FPS,
        "categories": list(spec["categories"]),
        "files": files,
    }
    with open(out / "corpus.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)
        f.write("\n")
    return manifest


def hash_seed(seed: int, *path) -> int:
    """Stable 63-bit sub-seed for a labelled stream."""
    return int(rng_for(seed, *path).integers(0, 2**63 - 1))


@dataclass(frozen=True)
class CorpusItem:
    name: str
    motion: Motion
    split: str


class Corpus:
    """In-memory labeled corpus with a frozen train/val split."""

    def __init__(self, items):
        self.items = list(items)
        if not self.items:
            raise ConfigError("corpus is empty")
        self.skeleton = self.items[0].motion.skeleton

    @property
    def categories(self):
        return sorted({it.motion.category for it in self.items})

    def split(self, which: str):
        return [it for it in self.items if it.split == which]

    def by_category(self, which=None):
        out = {}
        items = self.items if which is None else self.split(which)
        for it in items:
            out.setdefault(it.motion.category, []).append(it)
        return out


def load_corpus(corpus_dir) -> Corpus:
    from pathlib import Path

    root = Path(corpus_dir)
    manifest_path = root / "corpus.json"
    if not manifest_path.exists():
        raise SchemaError(f"{root}: missing corpus.json manifest")
    with open(manifest_path, "r", encoding="utf-8") as f:
        manifest = json.load(f)
    if manifest.get("format_version") != 1:
        raise SchemaError(f"{root}: unsupported corpus format_version")
    items = []
    for entry in manifest["files"]:
        m = load_motion(root / entry["file"])
        if m.category != entry["category"]:
            raise SchemaError(
                f"{entry['file']}: category {m.category!r} does not match manifest "
                f"{entry['category']!r}"
            )
        items.append(CorpusItem(entry["file"], m, entry["split"]))
    return Corpus(items)
