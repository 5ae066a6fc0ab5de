# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled measurement kernels.

Mirrors _kernels_np exactly: same layout contract (Fortran-ordered float64
arrays) and the same per-element accumulation order, so results are
bit-identical to the NumPy fallback. The loops are fused so each (shot,
band) pair touches the mask and cube slices once; the forward column loop
runs backwards precisely to keep the tap-accumulation order of the
slice-based fallback.
"""

import numpy as np


def forward(const double[::1, :, :] masks, double w0, double w1, double w2,
            const double[::1, :, :] cube):
    """Code, disperse and accumulate a cube onto K detector frames."""
    cdef Py_ssize_t M = masks.shape[0]
    cdef Py_ssize_t N = masks.shape[1]
    cdef Py_ssize_t K = masks.shape[2]
    cdef Py_ssize_t L = cube.shape[2]
    out_arr = np.zeros((M, N + L + 1, K), dtype=np.float64, order="F")
    cdef double[::1, :, :] out = out_arr
    cdef Py_ssize_t i, j, k, l
    cdef double c
    with nogil:
        for k in range(K):
            for l in range(L):
                for j in range(N - 1, -1, -1):
                    for i in range(M):
                        c = masks[i, j, k] * cube[i, j, l]
                        out[i, j + l, k] += w0 * c
                        out[i, j + l + 1, k] += w1 * c
                        out[i, j + l + 2, k] += w2 * c
    return out_arr


def adjoint(const double[::1, :, :] masks, double w0, double w1, double w2,
            const double[::1, :, :] frames):
    """Exact transpose of :func:`forward`; maps detector frames to a cube."""
    cdef Py_ssize_t M = masks.shape[0]
    cdef Py_ssize_t N = masks.shape[1]
    cdef Py_ssize_t K = masks.shape[2]
    cdef Py_ssize_t L = frames.shape[1] - N - 1
    out_arr = np.zeros((M, N, L), dtype=np.float64, order="F")
    cdef double[::1, :, :] out = out_arr
    cdef Py_ssize_t i, j, k, l
    cdef double t
    with nogil:
        for k in range(K):
            for l in range(L):
                for j in range(N):
                    for i in range(M):
                        t = masks[i, j, k]
                        out[i, j, l] += t * (w0 * frames[i, j + l, k])
                        out[i, j, l] += t * (w1 * frames[i, j + l + 1, k])
                        out[i, j, l] += t * (w2 * frames[i, j + l + 2, k])
    return out_arr
