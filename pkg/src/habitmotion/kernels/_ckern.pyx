# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: conv1d forward/backward (C im2col + BLAS GEMM),
pairwise squared distances, batched forward kinematics. Mirrors
kernels.pykern."""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()


cdef inline void _rm_gemm(char opA, char opB, int m, int n, int k,
                          double* A, int lda, double* B, int ldb,
                          double* C) noexcept nogil:
    # Row-major C (m x n) = op(A) @ op(B) via column-major BLAS with
    # swapped operands. lda/ldb are the row lengths of the row-major
    # arrays A and B.
    cdef double one = 1.0, zero = 0.0
    dgemm(&opB, &opA, &n, &m, &k, &one, B, &ldb, A, &lda, &zero, C, &n)


cdef char _OP_N = 78  # 'N'
cdef char _OP_T = 84  # 'T'


cdef void _fill_cols(double[:, :, ::1] xp, double[:, ::1] cols,
                     Py_ssize_t K, int stride, int dilation,
                     Py_ssize_t lout) noexcept nogil:
    # cols[c*K + k, b*lout + t] = xp[b, c, k*dilation + t*stride]
    cdef Py_ssize_t B = xp.shape[0], Ci = xp.shape[1]
    cdef Py_ssize_t b, c, k, t, base
    for c in range(Ci):
        for k in range(K):
            base = k * dilation
            for b in range(B):
                for t in range(lout):
                    cols[c * K + k, b * lout + t] = xp[b, c, base + t * stride]


def conv1d_forward(x, w, b, int stride, int dilation, int pad_l, int pad_r):
    cdef double[:, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t B = x.shape[0], Ci = x.shape[1], L = x.shape[2]
    cdef Py_ssize_t Co = wv.shape[0], K = wv.shape[2]
    cdef Py_ssize_t keff = (K - 1) * dilation + 1
    cdef Py_ssize_t Lp = L + pad_l + pad_r
    cdef Py_ssize_t lout = (Lp - keff) // stride + 1
    cdef Py_ssize_t M = B * lout, CiK = Ci * K
    xpad = np.zeros((B, Ci, Lp), dtype=np.float64)
    xpad[:, :, pad_l : pad_l + L] = x
    cdef double[:, :, ::1] xp = xpad
    cols_arr = np.empty((CiK, M), dtype=np.float64)
    cdef double[:, ::1] cols = cols_arr
    y2_arr = np.empty((Co, M), dtype=np.float64)
    cdef double[:, ::1] y2 = y2_arr
    out = np.empty((B, Co, lout), dtype=np.float64)
    cdef double[:, :, ::1] yv = out
    cdef Py_ssize_t ib, o, t
    with nogil:
        _fill_cols(xp, cols, K, stride, dilation, lout)
        _rm_gemm(_OP_N, _OP_N, <int>Co, <int>M, <int>CiK,
                 &wv[0, 0, 0], <int>CiK, &cols[0, 0], <int>M, &y2[0, 0])
        for ib in range(B):
            for o in range(Co):
                for t in range(lout):
                    yv[ib, o, t] = y2[o, ib * lout + t] + bv[o]
    return out


def conv1d_backward(x, w, gy, int stride, int dilation, int pad_l, int pad_r):
    cdef double[:, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[:, :, ::1] gv = np.ascontiguousarray(gy, dtype=np.float64)
    cdef Py_ssize_t B = x.shape[0], Ci = x.shape[1], L = x.shape[2]
    cdef Py_ssize_t Co = wv.shape[0], K = wv.shape[2]
    cdef Py_ssize_t lout = gv.shape[2]
    cdef Py_ssize_t Lp = L + pad_l + pad_r
    cdef Py_ssize_t M = B * lout, CiK = Ci * K
    xpad = np.zeros((B, Ci, Lp), dtype=np.float64)
    xpad[:, :, pad_l : pad_l + L] = x
    cdef double[:, :, ::1] xp = xpad
    cols_arr = np.empty((CiK, M), dtype=np.float64)
    cdef double[:, ::1] cols = cols_arr
    gy2_arr = np.empty((Co, M), dtype=np.float64)
    cdef double[:, ::1] gy2 = gy2_arr
    gcols_arr = np.empty((CiK, M), dtype=np.float64)
    cdef double[:, ::1] gcols = gcols_arr
    gxp_arr = np.zeros((B, Ci, Lp), dtype=np.float64)
    cdef double[:, :, ::1] gxp = gxp_arr
    gw = np.empty((Co, Ci, K), dtype=np.float64)
    gb = np.zeros(Co, dtype=np.float64)
    cdef double[:, :, ::1] gwv = gw
    cdef double[::1] gbv = gb
    cdef Py_ssize_t ib, o, t, c, k, base
    cdef double acc
    with nogil:
        _fill_cols(xp, cols, K, stride, dilation, lout)
        for ib in range(B):
            for o in range(Co):
                acc = 0.0
                for t in range(lout):
                    gy2[o, ib * lout + t] = gv[ib, o, t]
                    acc += gv[ib, o, t]
                gbv[o] += acc
        # gw = gy2 @ cols^T, gcols = w^T @ gy2
        _rm_gemm(_OP_N, _OP_T, <int>Co, <int>CiK, <int>M,
                 &gy2[0, 0], <int>M, &cols[0, 0], <int>M, &gwv[0, 0, 0])
        _rm_gemm(_OP_T, _OP_N, <int>CiK, <int>M, <int>Co,
                 &wv[0, 0, 0], <int>CiK, &gy2[0, 0], <int>M, &gcols[0, 0])
        for c in range(Ci):
            for k in range(K):
                base = k * dilation
                for ib in range(B):
                    for t in range(lout):
                        gxp[ib, c, base + t * stride] += gcols[c * K + k, ib * lout + t]
    return gxp_arr[:, :, pad_l : pad_l + L].copy(), gw, gb


def sqdist(a, b):
    cdef double[:, ::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[:, ::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t n = av.shape[0], m = bv.shape[0], d = av.shape[1]
    out = np.empty((n, m), dtype=np.float64)
    cdef double[:, ::1] ov = out
    cdef Py_ssize_t i, j, k
    cdef double acc, diff
    with nogil:
        for i in range(n):
            for j in range(m):
                acc = 0.0
                for k in range(d):
                    diff = av[i, k] - bv[j, k]
                    acc += diff * diff
                ov[i, j] = acc
    return out


def fk_positions(parents, offsets, quats, root_positions):
    cdef long long[::1] pv = np.ascontiguousarray(parents, dtype=np.int64)
    cdef double[:, ::1] ov = np.ascontiguousarray(offsets, dtype=np.float64)
    cdef double[:, :, ::1] qv = np.ascontiguousarray(quats, dtype=np.float64)
    cdef double[:, ::1] rv = np.ascontiguousarray(root_positions, dtype=np.float64)
    cdef Py_ssize_t T = qv.shape[0], N = qv.shape[1]
    gq = np.empty((T, N, 4), dtype=np.float64)
    x = np.empty((T, N, 3), dtype=np.float64)
    cdef double[:, :, ::1] gqv = gq
    cdef double[:, :, ::1] xv = x
    cdef Py_ssize_t t, j, p
    cdef double w1, x1, y1, z1, w2, x2, y2, z2
    cdef double cx, cy, cz, tx, ty, tz, vx, vy, vz, qw, qx, qy, qz
    with nogil:
        for t in range(T):
            gqv[t, 0, 0] = qv[t, 0, 0]
            gqv[t, 0, 1] = qv[t, 0, 1]
            gqv[t, 0, 2] = qv[t, 0, 2]
            gqv[t, 0, 3] = qv[t, 0, 3]
            xv[t, 0, 0] = rv[t, 0]
            xv[t, 0, 1] = rv[t, 1]
            xv[t, 0, 2] = rv[t, 2]
            for j in range(1, N):
                p = pv[j]
                w1 = gqv[t, p, 0]
                x1 = gqv[t, p, 1]
                y1 = gqv[t, p, 2]
                z1 = gqv[t, p, 3]
                w2 = qv[t, j, 0]
                x2 = qv[t, j, 1]
                y2 = qv[t, j, 2]
                z2 = qv[t, j, 3]
                gqv[t, j, 0] = w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2
                gqv[t, j, 1] = w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2
                gqv[t, j, 2] = w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2
                gqv[t, j, 3] = w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2
                # rotate offset j by the joint's global rotation
                qw = gqv[t, j, 0]
                qx = gqv[t, j, 1]
                qy = gqv[t, j, 2]
                qz = gqv[t, j, 3]
                vx = ov[j, 0]
                vy = ov[j, 1]
                vz = ov[j, 2]
                tx = 2.0 * (qy * vz - qz * vy)
                ty = 2.0 * (qz * vx - qx * vz)
                tz = 2.0 * (qx * vy - qy * vx)
                cx = qy * tz - qz * ty
                cy = qz * tx - qx * tz
                cz = qx * ty - qy * tx
                xv[t, j, 0] = xv[t, p, 0] + vx + qw * tx + cx
                xv[t, j, 1] = xv[t, p, 1] + vy + qw * ty + cy
                xv[t, j, 2] = xv[t, p, 2] + vz + qw * tz + cz
    return x
