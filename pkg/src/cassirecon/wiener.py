"""Adaptive Wiener shrinkage in the sparsifying-transform domain.

Each coefficient group (one spectral DCT band crossed with one wavelet
subband) gets empirical statistics (mu, nu^2) estimated from the current
noisy coefficients; every member is then shrunk toward its group mean with
gain max(0, nu^2 - sigma^2) / nu^2. The mean gain over all coefficients is
the denoiser derivative the AMP residual correction needs, so it is
returned alongside.

Statistics are recomputed from scratch on every call: the solver's noisy
coefficients change each iteration and the shrinkage must track them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .transforms import SparsifyingTransform, SubbandMap


@dataclass(frozen=True)
class SubbandStats:
    """Per-group empirical mean, population variance and member count."""

    mean: np.ndarray
    var: np.ndarray
    count: np.ndarray

    def __post_init__(self):
        if not (self.mean.shape == self.var.shape == self.count.shape):
            raise DimensionError("stats arrays must share one shape per group")
        if np.any(self.var < 0.0):
            raise ValueError("group variances must be nonnegative")
        if np.any(self.count < 1):
            raise ValueError("every group must have at least one member")


def _check_theta(theta: np.ndarray, smap: SubbandMap) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64).reshape(-1)
    if theta.size != smap.labels.size:
        raise DimensionError(
            f"coefficient vector length {theta.size} does not match "
            f"subband map size {smap.labels.size}"
        )
    return theta


def estimate_stats(theta: np.ndarray, smap: SubbandMap) -> SubbandStats:
    """Empirical mean and population variance of each coefficient group.

    Population (1/|g|) normalization keeps the variance defined for
    singleton groups, which occur at the coarsest wavelet scale.
    """
    theta = _check_theta(theta, smap)
    counts = smap.sizes
    sums = np.bincount(smap.labels, weights=theta, minlength=smap.n_groups)
    mean = sums / counts
    dev = theta - mean[smap.labels]
    var = np.bincount(smap.labels, weights=dev * dev, minlength=smap.n_groups) / counts
    return SubbandStats(mean=mean, var=var, count=counts)


def _group_gains(stats: SubbandStats, sigma2: float) -> np.ndarray:
    """Shrinkage gain per group: max(0, nu^2 - sigma^2) / nu^2, 0 when nu^2 = 0."""
    if sigma2 < 0.0:
        raise ValueError(f"noise variance must be nonnegative, got {sigma2}")
    gains = np.zeros_like(stats.var)
    pos = stats.var > 0.0
    gains[pos] = np.maximum(0.0, stats.var[pos] - sigma2) / stats.var[pos]
    return gains


def wiener_shrink(
    theta: np.ndarray, stats: SubbandStats, sigma2: float, smap: SubbandMap
) -> np.ndarray:
    """Shrink each coefficient toward its group mean by the group's gain.

    A group whose variance does not exceed the noise variance collapses to
    its mean (gain 0); with sigma2 = 0 every gain is 1.
    """
    theta = _check_theta(theta, smap)
    gains = _group_gains(stats, sigma2)[smap.labels]
    mu = stats.mean[smap.labels]
    return gains * (theta - mu) + mu


def shrink_derivative_mean(stats: SubbandStats, sigma2: float, smap: SubbandMap) -> float:
    """Average shrinkage gain over all coefficients; always in [0, 1].

    This equals the mean derivative of the shrinkage map and feeds the AMP
    residual correction term.
    """
    per_coeff = _group_gains(stats, sigma2)[smap.labels]
    # cumsum fixes a left-to-right accumulation order, reproducible across
    # backends and identical to a scalar reference loop
    total = float(np.cumsum(per_coeff)[-1])
    return total / per_coeff.size


def denoise_cube(
    q: np.ndarray,
    sigma2: float,
    transform: SparsifyingTransform,
    smap: SubbandMap,
) -> tuple[np.ndarray, float]:
    """Denoise a vectorized cube; returns (estimate, mean shrinkage gain)."""
    theta = transform.forward(q)
    stats = estimate_stats(theta, smap)
    theta_hat = wiener_shrink(theta, stats, sigma2, smap)
    deriv = shrink_derivative_mean(stats, sigma2, smap)
    return transform.inverse(theta_hat), deriv
