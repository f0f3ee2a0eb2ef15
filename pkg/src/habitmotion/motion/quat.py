"""Quaternion helpers, (w, x, y, z) component order throughout."""

import numpy as np

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def norm(q):
    return np.linalg.norm(q, axis=-1)


def normalize(q):
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    return q / n


def hemisphere(q):
    """Flip sign where w < 0 so every quaternion has w >= 0."""
    return np.where(q[..., 0:1] < 0.0, -q, q)


def conjugate(q):
    out = q.copy()
    out[..., 1:] = -out[..., 1:]
    return out


def mul(q, r):
    w1, x1, y1, z1 = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    w2, x2, y2, z2 = r[..., 0], r[..., 1], r[..., 2], r[..., 3]
    out = np.empty(np.broadcast(q, r).shape[:-1] + (4,))
    out[..., 0] = w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2
    out[..., 1] = w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2
    out[..., 2] = w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2
    out[..., 3] = w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2
    return out


def rotate(q, v):
    """Rotate 3-vectors v by unit quaternions q."""
    qv = q[..., 1:]
    w = q[..., 0:1]
    v = np.broadcast_to(v, qv.shape)
    t = 2.0 * np.cross(qv, v)
    return v + w * t + np.cross(qv, t)


def from_axis_angle(axis, angle):
    """Unit quaternion rotating by `angle` radians about unit `axis`."""
    axis = np.asarray(axis, dtype=np.float64)
    angle = np.asarray(angle, dtype=np.float64)
    half = 0.5 * angle
    out = np.empty(np.broadcast(axis[..., 0], angle).shape + (4,))
    out[..., 0] = np.cos(half)
    out[..., 1:] = np.sin(half)[..., None] * axis
    return out


def between(u, v):
    """Minimal-angle quaternion rotating unit vector u onto unit vector v.

    The result has zero twist about u by construction. Antiparallel
    inputs rotate 180 degrees about a deterministic perpendicular axis.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    d = float(u @ v)
    if d < -1.0 + 1e-12:
        ref = np.zeros(3)
        ref[int(np.argmin(np.abs(u)))] = 1.0
        axis = np.cross(u, ref)
        axis = axis / np.linalg.norm(axis)
        return np.concatenate(([0.0], axis))
    q = np.concatenate(([1.0 + d], np.cross(u, v)))
    return q / np.linalg.norm(q)


def to_axis_angle_x(q):
    """Signed rotation angle about +x for quaternions of the form
    (cos a/2, sin a/2, 0, 0); used by synthetic-corpus probes."""
    return 2.0 * np.arctan2(q[..., 1], q[..., 0])
