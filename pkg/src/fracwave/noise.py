"""Exact lattice sampling of noise that is white in time and fractional in space.

The driving field W has independent rows in time; within a row, cell masses
form a stationary Gaussian vector whose covariance is the second difference
of |x|^{2H} (fractional increments with Hurst index H).  H = 1/2 reduces to
space-time white noise.  Rows are sampled exactly with a circulant (FFT)
embedding, so statistical tests downstream see the true lattice law, not an
approximation.

Contents
--------
NoiseSpec, NoiseSheet   lattice geometry + sampled cell masses
fgn_cell_covariance     closed-form cell covariance within one row
sample_sheet            exact sampler (per-replica counter-based streams)
region_mass             total mass of an index rectangle
write_sheet, read_sheet binary dump of a sampled sheet
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

from typing import Optional

import numpy as np

__all__ = [
    "NoiseSpec",
    "NoiseSheet",
    "EmbeddingError",
    "fgn_cell_covariance",
    "sample_sheet",
    "region_mass",
    "write_sheet",
    "read_sheet",
]

SHEET_MAGIC = b"FWNS"
SHEET_VERSION = 1
_HEADER = struct.Struct("<4sIdddII")  # magic, version, hurst, dt, dx, n_time, n_space


class EmbeddingError(RuntimeError):
    """Circulant embedding produced too much negative spectral mass."""


@dataclass(frozen=True)
class NoiseSpec:
    """Geometry and seed of a noise sheet.

    Cell (i, j) covers [i*dt, (i+1)*dt) x [x0 + j*dx, x0 + (j+1)*dx); the
    spatial origin is immaterial to the law, which is stationary.
    """

    hurst: float
    dt: float
    dx: float
    n_time: int
    n_space: int
    seed: int = 0

    def __post_init__(self):
        if not (0.5 <= self.hurst < 1.0):
            raise ValueError(f"hurst must lie in [1/2, 1), got {self.hurst}")
        if self.dt <= 0 or self.dx <= 0:
            raise ValueError("dt and dx must be positive")
        if self.n_time < 1 or self.n_space < 1:
            raise ValueError("n_time and n_space must be at least 1")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass
class NoiseSheet:
    """Sampled cell masses, shape (n_time, n_space), row i = time slab i.

    replica identifies the generator substream that produced the sheet; it is
    None for sheets of external origin (read from a dump, hand-built)."""

    spec: NoiseSpec
    masses: np.ndarray = field(repr=False)
    replica: Optional[int] = None

    def __post_init__(self):
        expected = (self.spec.n_time, self.spec.n_space)
        if self.masses.shape != expected:
            raise ValueError(f"masses shape {self.masses.shape} != {expected}")

    @property
    def ref(self) -> str:
        """Stable provenance tag: generator seed and substream, or 'external'."""
        if self.replica is None:
            return "external"
        return f"philox:{self.spec.seed}:{self.replica}"


def fgn_cell_covariance(lag, hurst: float, dx: float):
    """Covariance between two same-row cells at the given index lag.

    Equals dt-free part only: multiply by dt for the full cell covariance.
    Closed form: (dx^{2H}/2) * (|d+1|^{2H} - 2|d|^{2H} + |d-1|^{2H}), the
    second difference of the fractional variance function.  Exact for
    H = 1/2 as well, where it collapses to dx at lag 0 and 0 otherwise.
    """
    if not (0.5 <= hurst < 1.0):
        raise ValueError(f"hurst must lie in [1/2, 1), got {hurst}")
    d = np.abs(np.asarray(lag, dtype=np.float64))
    two_h = 2.0 * hurst
    out = 0.5 * dx**two_h * ((d + 1.0) ** two_h - 2.0 * d**two_h + np.abs(d - 1.0) ** two_h)
    if out.ndim == 0:
        return float(out)
    return out


def _next_pow2(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


@lru_cache(maxsize=32)
def _embedding_spectrum(hurst: float, embed_size: int) -> np.ndarray:
    """Eigenvalues of the circulant embedding for unit dx, with clipping.

    embed_size = 2M; the covariance sequence r(0..M) is reflected to a
    circulant vector whose FFT must be nonnegative.  Small negative
    eigenvalues (roundoff) are clipped; a warning marks anything below
    -1e-10 of the spectral maximum, and the sampler refuses to proceed if
    the clipped mass exceeds 1e-6 of the total.
    """
    m = embed_size // 2
    r = fgn_cell_covariance(np.arange(m + 1), hurst, 1.0)
    circ = np.concatenate([r[:-1], r[-1:], r[-2:0:-1]])
    lam = np.fft.fft(circ).real
    lam_max = lam.max()
    negative = lam < 0.0
    if negative.any():
        clipped_mass = -lam[negative].sum()
        if lam[negative].min() < -1e-10 * lam_max:
            warnings.warn(
                f"circulant embedding (H={hurst}, size={embed_size}): clipping "
                f"{negative.sum()} negative eigenvalues, mass {clipped_mass:.3e}",
                RuntimeWarning,
            )
        if clipped_mass > 1e-6 * np.abs(lam).sum():
            raise EmbeddingError(
                f"negative spectral mass {clipped_mass:.3e} exceeds 1e-6 of total "
                f"for H={hurst}, embedding size {embed_size}"
            )
        lam = np.where(negative, 0.0, lam)
    lam.setflags(write=False)
    return lam


def _replica_rng(seed: int, replica: int) -> np.random.Generator:
    """Counter-based stream for one replica: Philox keyed by (seed, replica).

    Each row of the sheet occupies a fixed-length slice of this stream's
    counter sequence, so replicas never share state and results do not
    depend on scheduling.
    """
    key = np.array([seed, replica], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_sheet(spec: NoiseSpec, replica: int = 0) -> NoiseSheet:
    """Draw one sheet of cell masses; bit-reproducible for fixed (spec, replica).

    H = 1/2: cells are iid N(0, dt*dx).  H > 1/2: each row is an exact
    stationary fractional-increment vector, synthesized by the circulant
    embedding of size next_pow2(2*n_space).
    """
    rng = _replica_rng(spec.seed, replica)
    if spec.hurst == 0.5:
        z = rng.standard_normal((spec.n_time, spec.n_space))
        masses = z * np.sqrt(spec.dt * spec.dx)
        return NoiseSheet(spec=spec, masses=masses, replica=replica)

    embed = _next_pow2(2 * spec.n_space)
    m = embed // 2
    lam = _embedding_spectrum(spec.hurst, embed)
    z = rng.standard_normal((spec.n_time, embed))
    xi = np.empty((spec.n_time, embed), dtype=np.complex128)
    xi[:, 0] = z[:, 0]
    xi[:, m] = z[:, 1]
    half = (z[:, 2::2] + 1j * z[:, 3::2]) / np.sqrt(2.0)
    xi[:, 1:m] = half
    xi[:, m + 1:] = np.conj(half[:, ::-1])
    synth = np.fft.fft(np.sqrt(lam) * xi, axis=1).real[:, : spec.n_space]
    scale = np.sqrt(spec.dt) * spec.dx**spec.hurst / np.sqrt(embed)
    return NoiseSheet(spec=spec, masses=synth * scale, replica=replica)


def region_mass(sheet: NoiseSheet, rows: tuple[int, int], cols: tuple[int, int]) -> float:
    """Total noise mass of the index rectangle [rows) x [cols)."""
    r0, r1 = rows
    c0, c1 = cols
    if not (0 <= r0 <= r1 <= sheet.spec.n_time and 0 <= c0 <= c1 <= sheet.spec.n_space):
        raise IndexError(f"region ({rows}, {cols}) outside sheet {sheet.masses.shape}")
    return float(sheet.masses[r0:r1, c0:c1].sum())


def write_sheet(sheet: NoiseSheet, path) -> None:
    """Dump a sheet: 40-byte header then row-major little-endian float64."""
    spec = sheet.spec
    header = _HEADER.pack(
        SHEET_MAGIC, SHEET_VERSION, spec.hurst, spec.dt, spec.dx, spec.n_time, spec.n_space
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(sheet.masses, dtype="<f8").tobytes())


def read_sheet(path) -> NoiseSheet:
    """Read a dumped sheet.  The generator seed is not stored; spec.seed = 0."""
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) != _HEADER.size:
            raise ValueError(f"truncated sheet header in {path}")
        magic, version, hurst, dt, dx, n_time, n_space = _HEADER.unpack(raw)
        if magic != SHEET_MAGIC:
            raise ValueError(f"not a noise sheet dump: bad magic {magic!r}")
        if version != SHEET_VERSION:
            raise ValueError(f"unsupported sheet version {version}")
        body = np.frombuffer(fh.read(), dtype="<f8")
    expected = n_time * n_space
    if body.size != expected:
        raise ValueError(f"sheet body has {body.size} values, expected {expected}")
    spec = NoiseSpec(hurst=hurst, dt=dt, dx=dx, n_time=n_time, n_space=n_space, seed=0)
    return NoiseSheet(spec=spec, masses=body.reshape(n_time, n_space).copy())
