"""Pure-numpy implementations of the hot kernels.

Drop-in fallback for the compiled extension: same signatures, same float64
contiguous in/out contracts. Selected automatically when the extension is
not built (see kernels.__init__).
"""

import numpy as np


def _im2col(x, kernel, stride, dilation, pad_l, pad_r):
    """(B, Ci, L) -> columns (Ci*K, B*Lout) plus the padded input."""
    B, Ci, L = x.shape
    keff = (kernel - 1) * dilation + 1
    lp = L + pad_l + pad_r
    lout = (lp - keff) // stride + 1
    xp = np.zeros((B, Ci, lp))
    xp[:, :, pad_l : pad_l + L] = x
    cols = np.empty((Ci, kernel, B, lout))
    for k in range(kernel):
        sl = slice(k * dilation, k * dilation + stride * (lout - 1) + 1, stride)
        cols[:, k] = np.moveaxis(xp[:, :, sl], 0, 1)
    return cols.reshape(Ci * kernel, B * lout), xp, lout


def conv1d_forward(x, w, b, stride, dilation, pad_l, pad_r):
    """Dilated strided 1D convolution via im2col and one GEMM.

    x: (B, Cin, L), w: (Cout, Cin, K), b: (Cout,) -> (B, Cout, Lout) with
    Lout = (L + pad_l + pad_r - ((K-1)*dilation + 1)) // stride + 1.
    """
    B, Ci, L = x.shape
    Co, _, K = w.shape
    cols, _, lout = _im2col(x, K, stride, dilation, pad_l, pad_r)
    y = w.reshape(Co, Ci * K) @ cols + b[:, None]
    return np.ascontiguousarray(np.moveaxis(y.reshape(Co, B, lout), 1, 0))


def conv1d_backward(x, w, gy, stride, dilation, pad_l, pad_r):
    """Gradients of conv1d_forward w.r.t. (x, w, b) given upstream gy."""
    B, Ci, L = x.shape
    Co, _, K = w.shape
    lout = gy.shape[2]
    cols, xp, _ = _im2col(x, K, stride, dilation, pad_l, pad_r)
    gy2 = np.ascontiguousarray(np.moveaxis(gy, 0, 1)).reshape(Co, B * lout)
    gw = (gy2 @ cols.T).reshape(Co, Ci, K)
    gb = gy2.sum(axis=1)
    gcols = (w.reshape(Co, Ci * K).T @ gy2).reshape(Ci, K, B, lout)
    gxp = np.zeros_like(xp)
    for k in range(K):
        sl = slice(k * dilation, k * dilation + stride * (lout - 1) + 1, stride)
        gxp[:, :, sl] += np.moveaxis(gcols[:, k], 1, 0)
    return gxp[:, :, pad_l : pad_l + L].copy(), gw, gb


def sqdist(a, b):
    """Pairwise squared Euclidean distances, (n, d) x (m, d) -> (n, m).

    Computed from explicit differences (not the expanded dot-product form)
    so identical rows give an exact 0, which the nearest-neighbour tie
    rules rely on. Chunked over rows to bound memory.
    """
    n, d = a.shape
    m = b.shape[0]
    out = np.empty((n, m))
    step = max(1, (1 << 22) // (max(1, m * d)))
    for i in range(0, n, step):
        diff = a[i : i + step, None, :] - b[None, :, :]
        out[i : i + step] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


def fk_positions(parents, offsets, quats, root_positions):
    """Forward kinematics over a batch of frames.

    parents: (N,) int64 with parents[0] == -1, offsets: (N, 3),
    quats: (T, N, 4) local rotations in (w, x, y, z) order,
    root_positions: (T, 3). Returns global joint positions (T, N, 3).

    Each joint's global rotation is parent_global * local, and its
    position is parent position plus its own offset rotated by its own
    global rotation.
    """
    T, N, _ = quats.shape
    gq = np.empty((T, N, 4))
    x = np.empty((T, N, 3))
    gq[:, 0] = quats[:, 0]
    x[:, 0] = root_positions
    for j in range(1, N):
        p = parents[j]
        gq[:, j] = _quat_mul(gq[:, p], quats[:, j])
        x[:, j] = x[:, p] + _quat_rotate(gq[:, j], offsets[j])
    return x


def _quat_mul(q, r):
    w1, x1, y1, z1 = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    w2, x2, y2, z2 = r[..., 0], r[..., 1], r[..., 2], r[..., 3]
    out = np.empty(np.broadcast(q, r).shape[:-1] + (4,))
    out[..., 0] = w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2
    out[..., 1] = w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2
    out[..., 2] = w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2
    out[..., 3] = w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2
    return out


def _quat_rotate(q, v):
    # v' = v + w*t + q_v x t with t = 2 * (q_v x v); exact for unit q.
    qv = q[..., 1:]
    w = q[..., 0:1]
    t = 2.0 * np.cross(qv, np.broadcast_to(v, qv.shape))
    return v + w * t + np.cross(qv, t)
