"""Binary file formats and image export.

Three little-endian formats, all with a 4-byte magic:

* cube "HSC1":        u32 M, N, L; then M*N*L float32 values, flat order.
* measurements "HSM1": u32 K, M, N, L; float64 w0, w1, w2; u64 seed;
                       float64 sigma_noise; then K*M*(N+L+1) float32 values.
* apertures "HSA1":   u32 K, M, N; then K*M*N bytes of 0/1, row index
                       fastest, then column, then shot.

Payloads are float32 to halve file sizes; in-memory computation stays
float64 throughout. Writes go to a temp file in the target directory and
are renamed into place, so readers never observe partial files.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path
from typing import Union

import numpy as np

from .cubes import HyperCube, MeasurementSet
from .errors import DimensionError
from .operator import CodedApertureSet

CUBE_MAGIC = b"HSC1"
MEAS_MAGIC = b"HSM1"
APERTURE_MAGIC = b"HSA1"

_CUBE_HEADER = struct.Struct("<4sIII")
_MEAS_HEADER = struct.Struct("<4sIIII3dQd")
_APERTURE_HEADER = struct.Struct("<4sIII")

PathLike = Union[str, Path]


def atomic_write(path: PathLike, data: bytes) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _read_exact(path: PathLike, magic: bytes) -> bytes:
    data = Path(path).read_bytes()
    if len(data) < 4 or data[:4] != magic:
        raise ValueError(f"{path}: expected magic {magic!r}, got {data[:4]!r}")
    return data


def _expect_length(path: PathLike, data: bytes, expected: int) -> None:
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(data)}")


def write_cube(path: PathLike, cube: HyperCube) -> None:
    header = _CUBE_HEADER.pack(CUBE_MAGIC, cube.rows, cube.cols, cube.bands)
    payload = cube.values.astype("<f4").tobytes()
    atomic_write(path, header + payload)


def read_cube(path: PathLike) -> HyperCube:
    data = _read_exact(path, CUBE_MAGIC)
    _, M, N, L = _CUBE_HEADER.unpack_from(data)
    _expect_length(path, data, _CUBE_HEADER.size + 4 * M * N * L)
    values = np.frombuffer(data, dtype="<f4", offset=_CUBE_HEADER.size).astype(np.float64)
    return HyperCube(M, N, L, values)


def write_measurements(path: PathLike, ms: MeasurementSet) -> None:
    w0, w1, w2 = ms.weights
    header = _MEAS_HEADER.pack(
        MEAS_MAGIC, ms.shots, ms.rows, ms.cols, ms.bands,
        w0, w1, w2, ms.seed, ms.sigma_noise,
    )
    payload = ms.values.astype("<f4").tobytes()
    atomic_write(path, header + payload)


def read_measurements(path: PathLike) -> MeasurementSet:
    data = _read_exact(path, MEAS_MAGIC)
    _, K, M, N, L, w0, w1, w2, seed, sigma = _MEAS_HEADER.unpack_from(data)
    if abs((w0 + w1 + w2) - 1.0) > 1e-9:
        raise ValueError(f"{path}: recorded weights must sum to 1, got {(w0, w1, w2)}")
    count = K * M * (N + L + 1)
    _expect_length(path, data, _MEAS_HEADER.size + 4 * count)
    values = np.frombuffer(data, dtype="<f4", offset=_MEAS_HEADER.size).astype(np.float64)
    return MeasurementSet(
        shots=K, rows=M, cols=N, bands=L, values=values,
        weights=(w0, w1, w2), seed=seed, sigma_noise=sigma,
    )


def write_apertures(path: PathLike, apertures: CodedApertureSet) -> None:
    header = _APERTURE_HEADER.pack(
        APERTURE_MAGIC, apertures.shots, apertures.rows, apertures.cols
    )
    # flat order: row fastest, then column, then shot
    payload = np.moveaxis(apertures.masks, 0, 2).reshape(-1, order="F").tobytes()
    atomic_write(path, header + payload)


def read_apertures(path: PathLike) -> CodedApertureSet:
    data = _read_exact(path, APERTURE_MAGIC)
    _, K, M, N = _APERTURE_HEADER.unpack_from(data)
    _expect_length(path, data, _APERTURE_HEADER.size + K * M * N)
    flat = np.frombuffer(data, dtype=np.uint8, offset=_APERTURE_HEADER.size)
    masks = np.moveaxis(flat.reshape((M, N, K), order="F"), 2, 0)
    return CodedApertureSet(masks)


def write_pgm(path: PathLike, image: np.ndarray) -> None:
    """8-bit binary PGM (P5) from a 2D uint8 array."""
    img = np.asarray(image, dtype=np.uint8)
    if img.ndim != 2:
        raise DimensionError(f"expected a 2D image, got shape {img.shape}")
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    atomic_write(path, header + np.ascontiguousarray(img).tobytes())


def read_pgm(path: PathLike) -> np.ndarray:
    data = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM file")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 is supported")
    pos += 1  # single whitespace after maxval
    pixels = np.frombuffer(data, dtype=np.uint8, offset=pos, count=width * height)
    return pixels.reshape((height, width))


def export_pgm_slices(cube: HyperCube, outdir: PathLike, peak: float = 1.0) -> list[Path]:
    """One grayscale PGM per spectral band, linearly scaled by ``peak``.

    Files are named band_00.pgm, band_01.pgm, ... and returned in order.
    """
    if peak <= 0.0:
        raise ValueError(f"peak must be positive, got {peak}")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    arr = cube.as_array()
    paths = []
    for l in range(cube.bands):
        scaled = np.clip(np.rint(arr[:, :, l] / peak * 255.0), 0, 255).astype(np.uint8)
        path = outdir / f"band_{l:02d}.pgm"
        write_pgm(path, scaled)
        paths.append(path)
    return paths
