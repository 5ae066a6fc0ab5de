"""Built-in verification suite for the CLI ``selfcheck`` command.

Runs the core numerical invariants on a small instance: measurement-count
arithmetic, the operator adjoint identity, equivalence of the matrix-free
operator with its materialized matrix, transform round trips and energy
preservation, and a scalar-reference check of the Wiener shrinkage. All
checks must pass for a healthy build.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import transforms as tf
from .operator import (
    CassiModel,
    DispersionWeights,
    forward_apply,
    adjoint_apply,
    generate_apertures,
    materialize,
    measurement_count,
)
from .wiener import estimate_stats, shrink_derivative_mean, wiener_shrink


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str


def _scalar_wiener_reference(theta, labels, n_groups, sigma2):
    """Straight-line per-coefficient transcription of the shrinkage rule."""
    sums = [0.0] * n_groups
    counts = [0] * n_groups
    for i in range(theta.size):
        sums[labels[i]] += theta[i]
        counts[labels[i]] += 1
    means = [sums[g] / counts[g] for g in range(n_groups)]
    sq = [0.0] * n_groups
    for i in range(theta.size):
        d = theta[i] - means[labels[i]]
        sq[labels[i]] += d * d
    variances = [sq[g] / counts[g] for g in range(n_groups)]
    gains = [
        (max(0.0, v - sigma2) / v) if v > 0.0 else 0.0 for v in variances
    ]
    out = np.empty_like(theta)
    acc = 0.0
    for i in range(theta.size):
        gid = labels[i]
        out[i] = gains[gid] * (theta[i] - means[gid]) + means[gid]
        acc += gains[gid]
    return out, acc / theta.size


def run_selfcheck(
    M: int = 8, N: int = 8, L: int = 4, K: int = 2, corrupt_weights: bool = False
) -> list[CheckResult]:
    results: list[CheckResult] = []
    rng = np.random.default_rng(1234)

    weights = DispersionWeights(0.25, 0.5, 0.25)
    if corrupt_weights:
        # test hook: skip validation to simulate a broken build
        object.__setattr__(weights, "w0", 0.3)
    apertures = generate_apertures(M, N, K, "complementary" if K % 2 == 0 else "random", seed=7)
    model = CassiModel(apertures, weights, bands=L)

    w = weights.as_tuple()
    results.append(
        CheckResult(
            "dispersion weights sum to 1",
            abs(sum(w) - 1.0) <= 1e-12,
            f"sum={sum(w)!r}",
        )
    )

    m_expected = K * M * (N + L + 1)
    results.append(
        CheckResult(
            f"measurement count ({M},{N},{L},{K})",
            measurement_count(M, N, L, K) == m_expected,
            f"m={measurement_count(M, N, L, K)}",
        )
    )

    err = 0.0
    for _ in range(20):
        f = rng.standard_normal(model.n)
        g = rng.standard_normal(model.m)
        lhs = forward_apply(model, f) @ g
        rhs = f @ adjoint_apply(model, g)
        err = max(err, abs(lhs - rhs) / (np.linalg.norm(f) * np.linalg.norm(g)))
    results.append(CheckResult("adjoint identity (20 pairs)", err <= 1e-10, f"max rel err={err:.3e}"))

    H = materialize(model)
    results.append(
        CheckResult(
            f"materialized matrix shape {model.m}x{model.n}",
            H.shape == (model.m, model.n),
            f"shape={H.shape}",
        )
    )
    f = rng.standard_normal(model.n)
    dense_err = float(np.abs(H @ f - forward_apply(model, f)).max())
    results.append(
        CheckResult("matrix-free forward matches dense", dense_err <= 1e-12, f"max abs err={dense_err:.3e}")
    )

    transform = tf.SparsifyingTransform(M, N, L)
    x = rng.standard_normal(transform.n)
    theta = transform.forward(x)
    rt = float(np.abs(transform.inverse(theta) - x).max())
    parseval = abs(np.linalg.norm(theta) / np.linalg.norm(x) - 1.0)
    results.append(CheckResult("transform round trip", rt <= 1e-12, f"max abs err={rt:.3e}"))
    results.append(CheckResult("transform energy preservation", parseval <= 1e-10, f"rel err={parseval:.3e}"))

    smap = tf.subband_map(M, N, L, transform.levels)
    sigma2 = 0.5 * float(np.var(theta))
    stats = estimate_stats(theta, smap)
    got = wiener_shrink(theta, stats, sigma2, smap)
    got_d = shrink_derivative_mean(stats, sigma2, smap)
    want, want_d = _scalar_wiener_reference(theta, smap.labels, smap.n_groups, sigma2)
    wiener_ok = bool(np.array_equal(got, want)) and got_d == want_d
    results.append(CheckResult("wiener shrinkage matches scalar reference", wiener_ok, "bit-for-bit"))

    return results


def format_results(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = []
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        lines.append(f"{r.name.ljust(width)}  {status}  {r.detail}")
    passed = sum(r.ok for r in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(lines)
