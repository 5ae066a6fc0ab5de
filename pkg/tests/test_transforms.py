import numpy as np
import pytest

from cassirecon.errors import DimensionError
from cassirecon.transforms import (
    SparsifyingTransform,
    dct_spectral_forward,
    dct_spectral_inverse,
    default_levels,
    dwt2_forward,
    dwt2_inverse,
    subband_map,
)


def dct2_reference(x):
    """Direct cosine-sum transcription of the orthonormal DCT-II."""
    L = x.shape[-1]
    out = np.zeros_like(np.asarray(x, dtype=np.float64))
    l = np.arange(L)
    for p in range(L):
        c = np.sqrt(1.0 / L) if p == 0 else np.sqrt(2.0 / L)
        out[..., p] = c * (x * np.cos(np.pi * (2 * l + 1) * p / (2 * L))).sum(axis=-1)
    return out


def test_dwt2_constant_2x2_haar():
    c = dwt2_forward(np.full((2, 2), 3.0), 1, "haar")
    assert c[0, 0] == pytest.approx(6.0, abs=1e-15)
    assert np.abs(np.delete(c.ravel(), 0)).max() == 0.0


@pytest.mark.parametrize("wavelet", ["haar", "db4"])
def test_dwt2_energy_preserved(wavelet):
    rng = np.random.default_rng(0)
    x = rng.standard_normal((16, 16))
    c = dwt2_forward(x, 1, wavelet)
    assert abs(np.linalg.norm(c) - np.linalg.norm(x)) <= 1e-10 * np.linalg.norm(x)


@pytest.mark.parametrize("wavelet", ["haar", "db4"])
@pytest.mark.parametrize("levels", [1, 2, 3])
def test_dwt2_round_trip(wavelet, levels):
    rng = np.random.default_rng(levels)
    x = rng.standard_normal((32, 32))
    back = dwt2_inverse(dwt2_forward(x, levels, wavelet), levels, wavelet)
    assert np.abs(back - x).max() <= 1e-12


def test_dwt2_rejects_non_dyadic():
    with pytest.raises(DimensionError):
        dwt2_forward(np.zeros((6, 8)), 2)
    with pytest.raises(DimensionError):
        dwt2_inverse(np.zeros((8, 10)), 2)


def test_dct_spectral_constant_series():
    L = 8
    cube = np.full((2, 3, L), 1.5)
    out = dct_spectral_forward(cube)
    assert np.allclose(out[:, :, 0], 1.5 * np.sqrt(L), atol=1e-12)
    assert np.abs(out[:, :, 1:]).max() <= 1e-12


def test_dct_spectral_single_band_is_identity():
    rng = np.random.default_rng(1)
    cube = rng.standard_normal((4, 4, 1))
    assert np.abs(dct_spectral_forward(cube) - cube).max() <= 1e-15


def test_dct_spectral_round_trip():
    rng = np.random.default_rng(2)
    cube = rng.standard_normal((4, 4, 8))
    back = dct_spectral_inverse(dct_spectral_forward(cube))
    assert np.abs(back - cube).max() <= 1e-12


def test_dct_matches_cosine_sum_reference():
    rng = np.random.default_rng(3)
    cube = rng.standard_normal((3, 2, 7))
    assert np.abs(dct_spectral_forward(cube) - dct2_reference(cube)).max() <= 1e-12


@pytest.mark.parametrize("M", [8, 16, 32])
@pytest.mark.parametrize("N", [8, 16, 32])
@pytest.mark.parametrize("L", [1, 4, 8])
def test_psi_parseval_grid(M, N, L):
    t = SparsifyingTransform(M, N, L)
    rng = np.random.default_rng(M * 100 + N * 10 + L)
    x = rng.standard_normal(t.n)
    theta = t.forward(x)
    assert abs(np.linalg.norm(theta) / np.linalg.norm(x) - 1.0) <= 1e-10


@pytest.mark.parametrize("wavelet", ["haar", "db4"])
def test_psi_round_trip(wavelet):
    t = SparsifyingTransform(16, 16, 4, wavelet=wavelet)
    rng = np.random.default_rng(4)
    x = rng.standard_normal(t.n)
    assert np.abs(t.inverse(t.forward(x)) - x).max() <= 1e-12


def test_psi_inverse_is_adjoint():
    t = SparsifyingTransform(16, 8, 4)
    rng = np.random.default_rng(5)
    x = rng.standard_normal(t.n)
    y = rng.standard_normal(t.n)
    lhs = t.forward(x) @ y
    rhs = x @ t.inverse(y)
    assert abs(lhs - rhs) <= 1e-10 * np.linalg.norm(x) * np.linalg.norm(y)


def test_psi_constant_cube_single_coefficient():
    # full decimation: the deepest approximation block is a single value
    t = SparsifyingTransform(8, 8, 4, levels=3)
    theta = t.forward(np.full(t.n, 2.0))
    nz = np.nonzero(np.abs(theta) > 1e-10)[0]
    assert nz.size == 1
    # spectral DC x deepest approximation lands at flat index 0
    assert nz[0] == 0
    assert theta[0] == pytest.approx(2.0 * np.sqrt(t.n), rel=1e-12)


def test_psi_pure_cosine_profile_single_spectral_group():
    M, N, L = 8, 8, 8
    t = SparsifyingTransform(M, N, L)
    smap = subband_map(M, N, L, t.levels)
    per_band = 3 * t.levels + 1
    for p in (1, 3, 5):
        profile = np.cos(np.pi * (2 * np.arange(L) + 1) * p / (2 * L))
        cube = np.broadcast_to(profile, (M, N, L))
        theta = t.forward(np.asfortranarray(cube).reshape(-1, order="F"))
        groups = np.unique(smap.labels[np.abs(theta) > 1e-10])
        bands = {g // per_band for g in groups}
        assert bands == {p}


def test_psi_length_mismatch():
    t = SparsifyingTransform(8, 8, 2)
    with pytest.raises(DimensionError):
        t.forward(np.zeros(t.n + 1))
    with pytest.raises(DimensionError):
        t.inverse(np.zeros(t.n - 1))


def test_non_dyadic_rejected():
    with pytest.raises(DimensionError):
        SparsifyingTransform(12, 8, 2, levels=3)


def test_default_levels():
    assert default_levels(32, 32) == 3
    assert default_levels(8, 8) == 1
    assert default_levels(2, 2) == 1
    assert SparsifyingTransform(32, 32, 4).levels == 3


def test_subband_map_2x2_singletons():
    smap = subband_map(2, 2, 1, 1)
    assert smap.n_groups == 4
    assert list(smap.sizes) == [1, 1, 1, 1]


def test_subband_map_4x4_two_bands():
    smap = subband_map(4, 4, 2, 1)
    assert smap.n_groups == 8
    assert np.all(smap.sizes == 4)
    assert smap.describe(0) == (0, "ll1")
    assert smap.describe(7) == (1, "hh1")


def test_subband_map_is_partition():
    rng = np.random.default_rng(6)
    for _ in range(5):
        levels = int(rng.integers(1, 3))
        M, N = 8 * int(rng.integers(1, 4)), 8 * int(rng.integers(1, 4))
        L = int(rng.integers(1, 6))
        smap = subband_map(M, N, L, levels)
        assert smap.labels.size == M * N * L
        assert smap.sizes.sum() == M * N * L
        assert np.all(np.bincount(smap.labels, minlength=smap.n_groups) == smap.sizes)
        assert smap.labels.min() == 0
        assert smap.labels.max() == smap.n_groups - 1
