"""Measurement-noise injection and reconstruction-quality metrics.

The SNR convention here is a mean-to-standard-deviation ratio,
``10*log10(mean(g) / sigma_noise)``, written "cassi-snr" in CLI output to
distinguish it from the usual power-ratio SNR. PSNR is computed per 2D
spectral slice against a configured peak (1.0 for normalized cubes, 255
for raw 8-bit data) and averaged over bands.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionError


def add_noise(g_clean: np.ndarray, snr_db: float, seed: int = 0) -> tuple[np.ndarray, float]:
    """Add seeded zero-mean Gaussian noise at a target cassi-snr.

    Returns (noisy measurements, noise standard deviation). The clean
    measurements must have positive mean or the SNR target is undefined.
    """
    g = np.asarray(g_clean, dtype=np.float64).reshape(-1)
    mu = float(g.mean())
    if mu <= 0.0:
        raise ValueError(f"cassi-snr needs positive measurement mean, got {mu}")
    sigma = mu / 10.0 ** (snr_db / 10.0)
    rng = np.random.default_rng(seed)
    return g + rng.normal(0.0, sigma, g.size), sigma


def measure_snr(g_clean: np.ndarray, g_noisy: np.ndarray) -> float:
    """Realized cassi-snr in dB; +inf when the two vectors are identical."""
    clean = np.asarray(g_clean, dtype=np.float64).reshape(-1)
    noisy = np.asarray(g_noisy, dtype=np.float64).reshape(-1)
    if clean.size != noisy.size:
        raise DimensionError(f"length mismatch {clean.size} vs {noisy.size}")
    mu = float(clean.mean())
    if mu <= 0.0:
        raise ValueError(f"cassi-snr needs positive measurement mean, got {mu}")
    sigma = float(np.std(noisy - clean))
    if sigma == 0.0:
        return float("inf")
    return 10.0 * np.log10(mu / sigma)


def psnr_slice(ref_slice: np.ndarray, est_slice: np.ndarray, peak: float = 1.0) -> float:
    """PSNR of one 2D slice in dB; +inf sentinel when the MSE is zero."""
    ref = np.asarray(ref_slice, dtype=np.float64)
    est = np.asarray(est_slice, dtype=np.float64)
    if ref.shape != est.shape:
        raise DimensionError(f"shape mismatch {ref.shape} vs {est.shape}")
    if peak <= 0.0:
        raise ValueError(f"peak must be positive, got {peak}")
    mse = float(np.mean((ref - est) ** 2))
    if mse == 0.0:
        return float("inf")
    return 10.0 * np.log10(peak * peak / mse)


def per_band_psnr(ref_cube: np.ndarray, est_cube: np.ndarray, peak: float = 1.0) -> np.ndarray:
    """PSNR of every spectral band of two (M, N, L) cubes."""
    ref = np.asarray(ref_cube, dtype=np.float64)
    est = np.asarray(est_cube, dtype=np.float64)
    if ref.shape != est.shape or ref.ndim != 3:
        raise DimensionError(f"expected matching 3D cubes, got {ref.shape} vs {est.shape}")
    return np.array(
        [psnr_slice(ref[:, :, l], est[:, :, l], peak) for l in range(ref.shape[2])]
    )


class PsnrSummary(NamedTuple):
    value: float
    infinite_bands: int

    @property
    def flagged(self) -> bool:
        return self.infinite_bands > 0


def avg_psnr(ref_cube: np.ndarray, est_cube: np.ndarray, peak: float = 1.0) -> PsnrSummary:
    """Mean per-band PSNR; infinite bands are excluded and counted.

    When every band is infinite (identical cubes) the sentinel propagates
    as value = +inf with the flag set.
    """
    band_psnr = per_band_psnr(ref_cube, est_cube, peak)
    finite = np.isfinite(band_psnr)
    n_inf = int(band_psnr.size - finite.sum())
    if not finite.any():
        return PsnrSummary(float("inf"), n_inf)
    return PsnrSummary(float(band_psnr[finite].mean()), n_inf)
