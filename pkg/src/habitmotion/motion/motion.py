"""Motion sequences: per-frame local quaternions and joint velocities,
the 7N feature packing, and lossless JSON I/O.

Root global translation is carried by the root joint's velocity channel
(position differences, first frame zero), so the feature layout is
exactly [q flattened | v flattened] with no extra channels.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from habitmotion.errors import InvariantError, SchemaError
from habitmotion.motion import quat
from habitmotion.motion.kinematics import compute_velocities, fk_sequence
from habitmotion.motion.skeleton import Skeleton

UNIT_TOL = 1e-6
FORMAT_VERSION = 1


@dataclass(frozen=True)
class Motion:
    """T frames of N unit quaternions (w >= 0) and N velocities, with a
    category label. Immutable after construction."""

    skeleton: Skeleton
    quats: np.ndarray  # (T, N, 4)
    vels: np.ndarray  # (T, N, 3)
    category: str
    fps: float = 30.0

    def __post_init__(self):
        q = np.asarray(self.quats, dtype=np.float64)
        v = np.asarray(self.vels, dtype=np.float64)
        object.__setattr__(self, "quats", q)
        object.__setattr__(self, "vels", v)
        n = self.skeleton.n_joints
        if q.ndim != 3 or q.shape[1:] != (n, 4):
            raise InvariantError(f"quaternions must be (T, {n}, 4), got {q.shape}")
        if v.shape != q.shape[:2] + (3,):
            raise InvariantError(f"velocities must be (T, {n}, 3), got {v.shape}")
        if q.shape[0] < 2:
            raise InvariantError(f"motion needs T >= 2 frames, got {q.shape[0]}")
        if self.fps <= 0:
            raise InvariantError(f"fps must be positive, got {self.fps}")
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(v))):
            raise InvariantError("non-finite values in motion")
        norms = np.linalg.norm(q, axis=-1)
        bad = np.abs(norms - 1.0) > UNIT_TOL
        if np.any(bad):
            t, j = (int(i) for i in np.argwhere(bad)[0])
            raise InvariantError(
                f"quaternion at frame {t}, joint {j} has norm {norms[t, j]:.8f} "
                f"(unit within {UNIT_TOL} required)"
            )
        neg = q[..., 0] < 0.0
        if np.any(neg):
            t, j = (int(i) for i in np.argwhere(neg)[0])
            raise InvariantError(f"quaternion at frame {t}, joint {j} has w < 0")
        if np.any(v[0] != 0.0):
            raise InvariantError("first-frame velocities must be zero")

    @property
    def n_frames(self) -> int:
        return self.quats.shape[0]

    @property
    def n_joints(self) -> int:
        return self.quats.shape[1]

    def root_positions(self) -> np.ndarray:
        """Root trajectory integrated from the root velocity channel,
        starting at the origin."""
        return np.cumsum(self.vels[:, 0, :], axis=0)

    def joint_positions(self) -> np.ndarray:
        """Global joint positions (T, N, 3) via forward kinematics."""
        return fk_sequence(self.skeleton, self.quats, self.root_positions())


def motion_to_features(m: Motion) -> np.ndarray:
    """Per-frame concatenation [q (4N) | v (3N)] as a (T, 7N) matrix."""
    t, n = m.n_frames, m.n_joints
    return np.concatenate([m.quats.reshape(t, 4 * n), m.vels.reshape(t, 3 * n)], axis=1)


def features_to_motion(features, skeleton: Skeleton, category: str, fps=30.0) -> Motion:
    """Inverse of motion_to_features with normalization: quaternions are
    renormalized onto the w >= 0 hemisphere (zero quaternions become the
    identity, counted and reported via a warning) and the first-frame
    velocity is forced to zero."""
    f = np.asarray(features, dtype=np.float64)
    n = skeleton.n_joints
    if f.ndim != 2 or f.shape[1] != 7 * n:
        raise InvariantError(f"features must be (T, {7 * n}), got {f.shape}")
    t = f.shape[0]
    q = f[:, : 4 * n].reshape(t, n, 4).copy()
    v = f[:, 4 * n :].reshape(t, n, 3).copy()
    norms = np.linalg.norm(q, axis=-1)
    dead = norms < 1e-12
    n_dead = int(dead.sum())
    if n_dead:
        warnings.warn(f"{n_dead} zero quaternion(s) decoded; replaced by identity")
        q[dead] = quat.IDENTITY
        norms = np.linalg.norm(q, axis=-1)
    q = quat.hemisphere(q / norms[..., None])
    v[0] = 0.0
    return Motion(skeleton, q, v, category, fps)


def recompute_velocities(m: Motion) -> Motion:
    """Replace velocity channels with differences of FK positions so the
    q/v consistency invariant holds by construction. The root trajectory
    (from the original root velocities) is preserved."""
    x = m.joint_positions()
    return Motion(m.skeleton, m.quats, compute_velocities(x), m.category, m.fps)


# -- JSON round-trip -----------------------------------------------------


def motion_to_dict(m: Motion) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "skeleton": {
            "names": list(m.skeleton.joint_names),
            "parents": [int(p) for p in m.skeleton.parents],
            "offsets": [[float(c) for c in off] for off in m.skeleton.offsets],
        },
        "category": m.category,
        "fps": float(m.fps),
        "frames": [
            {
                "q": [[float(c) for c in joint] for joint in m.quats[t]],
                "v": [[float(c) for c in joint] for joint in m.vels[t]],
            }
            for t in range(m.n_frames)
        ],
    }


def motion_from_dict(doc: dict) -> Motion:
    for key in ("format_version", "skeleton", "category", "fps", "frames"):
        if key not in doc:
            raise SchemaError(f"motion document missing key {key!r}")
    if doc["format_version"] != FORMAT_VERSION:
        raise SchemaError(f"unsupported motion format_version {doc['format_version']}")
    sk = doc["skeleton"]
    for key in ("names", "parents", "offsets"):
        if key not in sk:
            raise SchemaError(f"skeleton missing key {key!r}")
    skeleton = Skeleton(tuple(sk["names"]), sk["parents"], sk["offsets"])
    frames = doc["frames"]
    if not isinstance(frames, list) or len(frames) < 2:
        raise SchemaError("frames must be a list with at least 2 entries")
    try:
        q = np.asarray([fr["q"] for fr in frames], dtype=np.float64)
        v = np.asarray([fr["v"] for fr in frames], dtype=np.float64)
    except (KeyError, ValueError) as e:
        raise SchemaError(f"malformed frame data: {e}") from e
    return Motion(skeleton, q, v, str(doc["category"]), float(doc["fps"]))


def save_motion(m: Motion, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(motion_to_dict(m), f)
        f.write("\n")


def load_motion(path) -> Motion:
    with open(path, "r", encoding="utf-8") as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: invalid JSON: {e}") from e
    try:
        return motion_from_dict(doc)
    except (SchemaError, InvariantError) as e:
        raise type(e)(f"{path}: {e}") from e
