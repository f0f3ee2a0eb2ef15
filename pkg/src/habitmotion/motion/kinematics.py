"""Forward and inverse kinematics.

FK composes rotations down the tree: a joint's global rotation is its
parent's global rotation times its local one, and its position is the
parent position plus its own offset rotated by its own global rotation.
Under that convention IK decomposes exactly per joint: each joint's
rotation is the minimal-angle (zero-twist) quaternion aligning its
rest-pose bone direction, expressed in the parent frame, with the
observed bone direction. The root, having no bone of its own, takes the
alignment of its first child's bone; that child then solves to identity.
"""

import numpy as np

from habitmotion import kernels
from habitmotion.errors import InvariantError
from habitmotion.motion import quat
from habitmotion.motion.skeleton import Skeleton

QUAT_NORM_TOL = 1e-3
BONE_LENGTH_RTOL = 1e-3


def _check_quat_norms(q):
    norms = np.linalg.norm(q, axis=-1)
    bad = np.abs(norms - 1.0) > QUAT_NORM_TOL
    if np.any(bad):
        idx = tuple(int(v) for v in np.argwhere(bad)[0])
        raise InvariantError(
            f"quaternion norm {norms[bad][0]:.6f} outside [1-{QUAT_NORM_TOL}, 1+{QUAT_NORM_TOL}] "
            f"at index {idx}"
        )


def forward_kinematics(skeleton: Skeleton, q, root_position=(0.0, 0.0, 0.0)):
    """Global joint positions (N, 3) for one pose of N local quaternions."""
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (skeleton.n_joints, 4):
        raise InvariantError(f"expected quaternions of shape ({skeleton.n_joints}, 4), got {q.shape}")
    _check_quat_norms(q)
    root = np.asarray(root_position, dtype=np.float64).reshape(1, 3)
    return kernels.fk_positions(skeleton.parents, skeleton.offsets, q[None], root)[0]


def fk_sequence(skeleton: Skeleton, quats, root_positions):
    """Global joint positions (T, N, 3) for a quaternion sequence (T, N, 4)."""
    quats = np.asarray(quats, dtype=np.float64)
    _check_quat_norms(quats)
    roots = np.ascontiguousarray(root_positions, dtype=np.float64)
    return kernels.fk_positions(skeleton.parents, skeleton.offsets, quats, roots)


def inverse_kinematics(skeleton: Skeleton, x):
    """Swing-only local quaternions (N, 4) reproducing global positions x.

    Requires observed bone lengths to match the skeleton within
    BONE_LENGTH_RTOL relative error. Twist about each bone axis is zero;
    positions round-trip exactly through forward kinematics.
    """
    x = np.asarray(x, dtype=np.float64)
    n = skeleton.n_joints
    if x.shape != (n, 3):
        raise InvariantError(f"expected positions of shape ({n}, 3), got {x.shape}")
    lengths = skeleton.bone_lengths()
    rest_dirs = np.zeros((n, 3))
    for j in range(1, n):
        rest_dirs[j] = skeleton.offsets[j] / lengths[j]

    q = np.tile(quat.IDENTITY, (n, 1))
    gq = np.tile(quat.IDENTITY, (n, 1))

    def observed_dir(j):
        d = x[j] - x[int(skeleton.parents[j])]
        dist = np.linalg.norm(d)
        if dist <= 0.0:
            raise InvariantError(f"zero-length observed bone at joint {j}")
        if abs(dist - lengths[j]) > BONE_LENGTH_RTOL * lengths[j]:
            raise InvariantError(
                f"bone length mismatch at joint {j}: observed {dist:.6f}, "
                f"skeleton {lengths[j]:.6f}"
            )
        return d / dist

    root_kids = skeleton.children(0)
    if root_kids:
        c0 = root_kids[0]
        q[0] = quat.hemisphere(quat.between(rest_dirs[c0], observed_dir(c0)))
        gq[0] = q[0]
    for j in range(1, n):
        p = int(skeleton.parents[j])
        d_local = quat.rotate(quat.conjugate(gq[p])[None], observed_dir(j)[None])[0]
        nl = np.linalg.norm(d_local)
        q[j] = quat.hemisphere(quat.between(rest_dirs[j], d_local / nl))
        gq[j] = quat.mul(gq[p], q[j])
    return q


def compute_velocities(x_sequence):
    """Frame-to-frame differences of global positions; the first frame is
    zero by convention."""
    x = np.asarray(x_sequence, dtype=np.float64)
    if x.ndim != 3 or x.shape[0] < 2:
        raise InvariantError(f"need a (T>=2, N, 3) position sequence, got {x.shape}")
    v = np.zeros_like(x)
    v[1:] = x[1:] - x[:-1]
    return v
