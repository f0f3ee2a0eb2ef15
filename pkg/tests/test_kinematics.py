import math

import numpy as np
import pytest

from conftest import unit_quats
from habitmotion.errors import InvariantError
from habitmotion.motion import (
    Skeleton,
    compute_velocities,
    forward_kinematics,
    inverse_kinematics,
    reference_skeleton,
)
from habitmotion.motion import quat


def two_joint_chain():
    return Skeleton(("root", "child"), [-1, 0], [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0)])


def test_fk_identity_is_cumulative_offsets():
    sk = reference_skeleton()
    q = np.tile(quat.IDENTITY, (sk.n_joints, 1))
    x = forward_kinematics(sk, q)
    expected = np.zeros((sk.n_joints, 3))
    for j in range(1, sk.n_joints):
        expected[j] = expected[sk.parents[j]] + sk.offsets[j]
    assert np.allclose(x, expected)


def test_fk_rotated_root_hand_case():
    sk = two_joint_chain()
    s = math.sqrt(0.5)
    q = np.array([[s, 0.0, 0.0, s], [1.0, 0.0, 0.0, 0.0]])
    x = forward_kinematics(sk, q)
    assert np.allclose(x[1], [0.0, 1.0, 0.0], atol=1e-12)


def test_fk_rejects_bad_quaternion_norm():
    sk = two_joint_chain()
    q = np.array([[0.9, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]])
    with pytest.raises(InvariantError, match="norm"):
        forward_kinematics(sk, q)


def test_ik_identity_pose():
    sk = reference_skeleton()
    q = np.tile(quat.IDENTITY, (sk.n_joints, 1))
    x = forward_kinematics(sk, q)
    assert np.allclose(inverse_kinematics(sk, x), q, atol=1e-12)


def test_ik_recovers_rotated_root():
    sk = two_joint_chain()
    s = math.sqrt(0.5)
    q = np.array([[s, 0.0, 0.0, s], [1.0, 0.0, 0.0, 0.0]])
    x = forward_kinematics(sk, q)
    q_rec = inverse_kinematics(sk, x)
    assert np.allclose(q_rec[0], q[0], atol=1e-12)


def test_fk_ik_roundtrip_random_poses():
    sk = reference_skeleton()
    rng = np.random.default_rng(42)
    for _ in range(50):
        q = unit_quats(rng, (sk.n_joints,))
        root = rng.standard_normal(3)
        x = forward_kinematics(sk, q, root)
        q2 = inverse_kinematics(sk, x)
        x2 = forward_kinematics(sk, q2, x[0])
        assert np.abs(x2 - x).max() < 1e-6


def test_ik_rejects_bone_length_mismatch():
    sk = two_joint_chain()
    x = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]])  # bone should be length 1
    with pytest.raises(InvariantError, match="length"):
        inverse_kinematics(sk, x)


def test_ik_rejects_zero_length_bone():
    sk = two_joint_chain()
    x = np.zeros((2, 3))
    with pytest.raises(InvariantError, match="zero-length"):
        inverse_kinematics(sk, x)


def test_ik_zero_twist_convention():
    # Swing-only solutions leave the twist degree of freedom at zero:
    # for a bone along +x the recovered quaternion has zero x component.
    sk = two_joint_chain()
    rng = np.random.default_rng(3)
    for _ in range(20):
        q = unit_quats(rng, (2,))
        x = forward_kinematics(sk, q)
        q_rec = inverse_kinematics(sk, x)
        assert abs(q_rec[0][1]) < 1e-9


class TestComputeVelocities:
    def test_static_pose_zero(self):
        x = np.ones((5, 3, 3))
        assert np.allclose(compute_velocities(x), 0.0)

    def test_uniform_motion(self):
        x = np.zeros((6, 1, 3))
        x[:, 0, 0] = np.arange(6.0)
        v = compute_velocities(x)
        assert np.allclose(v[0], 0.0)
        assert np.allclose(v[1:, 0, 0], 1.0)

    def test_telescoping_identity(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal((7, 4, 3))
        v = compute_velocities(x)
        assert np.allclose(v[1:].sum(axis=0), x[-1] - x[0], atol=1e-12)

    def test_too_short_rejected(self):
        with pytest.raises(InvariantError):
            compute_velocities(np.zeros((1, 2, 3)))


class TestSkeletonValidation:
    def test_non_topological_parent(self):
        with pytest.raises(InvariantError, match="non-topological parent"):
            Skeleton(("a", "b", "c", "d"), [-1, 0, 1, 5],
                     [(0, 0, 0), (1, 0, 0), (1, 0, 0), (1, 0, 0)])

    def test_single_root_required(self):
        with pytest.raises(InvariantError, match="root"):
            Skeleton(("a", "b"), [-1, -1], [(0, 0, 0), (1, 0, 0)])

    def test_zero_offset_rejected(self):
        with pytest.raises(InvariantError, match="zero-length"):
            Skeleton(("a", "b"), [-1, 0], [(0, 0, 0), (0, 0, 0)])

    def test_reference_skeleton_has_21_joints(self):
        assert reference_skeleton().n_joints == 21
