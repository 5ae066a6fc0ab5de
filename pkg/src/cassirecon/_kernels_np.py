"""NumPy implementation of the measurement kernels.

Used when the compiled extension is unavailable. Accumulation order is
fixed (shot-major, then band, then dispersion tap) and kept identical to
the compiled loops so both backends produce bit-identical results.

Array layout contract (all float64, Fortran order):
  masks (M, N, K), cube (M, N, L), detector frames (M, N+L+1, K).
"""

import numpy as np


def forward(masks, w0, w1, w2, cube):
    """Code, disperse and accumulate a cube onto K detector frames."""
    M, N, K = masks.shape
    L = cube.shape[2]
    out = np.zeros((M, N + L + 1, K), dtype=np.float64, order="F")
    weights = (w0, w1, w2)
    for k in range(K):
        mask = masks[:, :, k]
        for l in range(L):
            coded = mask * cube[:, :, l]
            for d, w in enumerate(weights):
                out[:, l + d : l + d + N, k] += w * coded
    return out


def adjoint(masks, w0, w1, w2, frames):
    """Exact transpose of :func:`forward`; maps detector frames to a cube."""
    M, N, K = masks.shape
    L = frames.shape[1] - N - 1
    out = np.zeros((M, N, L), dtype=np.float64, order="F")
    weights = (w0, w1, w2)
    for k in range(K):
        mask = masks[:, :, k]
        for l in range(L):
            for d, w in enumerate(weights):
                out[:, :, l] += mask * (w * frames[:, l + d : l + d + N, k])
    return out
