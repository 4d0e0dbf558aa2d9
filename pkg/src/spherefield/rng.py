"""Counter-based random streams for reproducible parallel Monte Carlo.

Every variate is a pure function of an integer key tuple: a 64-bit
avalanche mix (the SplitMix64 finalizer) is folded over the key fields,
the resulting counter is mapped to a uniform in (0, 1) with 52 bits of
resolution, and standard normals are produced by the inverse normal CDF.
There is no shared generator state, so generation is deterministic under
any execution order, chunking, or degree of parallelism.

Distinct purposes (coefficient noise, eigenframes, Gaussian reference
draws, probe operators) use distinct domain-separation constants so their
streams never collide even for equal index tuples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

PURPOSE_COEFFICIENT = 0x636F656666  # coefficient noise xi_{j,l,m}
PURPOSE_FRAME = 0x6672616D65        # random orthogonal eigenframes
PURPOSE_GAUSS_REF = 0x7A726566      # Gaussian reference draws in the E-basis
PURPOSE_PROBE = 0x70726F6265        # probe operators for distribution tests

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX_1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class StreamKey:
    """Key of one coefficient-noise normal: distinct tuples give
    statistically independent values."""

    master_seed: int
    replicate: int
    ell: int
    m: int
    j: int


def _mix64(x: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer; full-avalanche 64-bit permutation."""
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX_1
        z = (z ^ (z >> np.uint64(27))) * _MIX_2
        return z ^ (z >> np.uint64(31))


def counter_hash(master_seed: int, purpose: int, *fields) -> np.ndarray:
    """Fold key fields into a 64-bit counter; broadcasts array fields."""
    state = _mix64(np.uint64(master_seed & _U64_MASK) ^ np.uint64(purpose))
    for f in fields:
        arr = np.asarray(f, dtype=np.int64).astype(np.uint64)
        state = _mix64(np.asarray(state ^ arr, dtype=np.uint64))
    return np.asarray(state, dtype=np.uint64)


def uniforms(master_seed: int, purpose: int, *fields) -> np.ndarray:
    """Uniform(0, 1) variates keyed by the fields; open interval."""
    h = counter_hash(master_seed, purpose, *fields)
    return ((h >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0**-52


def standard_normals(master_seed: int, purpose: int, *fields) -> np.ndarray:
    """Standard normal variates keyed by the fields, via the inverse CDF."""
    return ndtri(uniforms(master_seed, purpose, *fields))


def standard_normal(key: StreamKey) -> float:
    """The single coefficient-noise normal for one key tuple.

    Block generators in the sampler produce exactly these values; this
    scalar form is the reference the keyed-stream tests pin against.
    """
    return float(
        standard_normals(
            key.master_seed, PURPOSE_COEFFICIENT, key.replicate, key.ell, key.m, key.j
        )
    )


def random_orthogonal(dim: int, master_seed: int, ell: int) -> np.ndarray:
    """Seeded Haar-like orthogonal frame for one degree.

    QR of a keyed Gaussian matrix with the R diagonal sign fixed, so the
    result is a pure function of (master_seed, ell) on every platform.
    """
    rows = np.arange(dim)[:, None]
    cols = np.arange(dim)[None, :]
    gauss = standard_normals(master_seed, PURPOSE_FRAME, ell, rows, cols)
    q, r = np.linalg.qr(gauss)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs[None, :]
