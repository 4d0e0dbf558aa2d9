"""Ground-truth spectral models: per-degree covariance operators, the
reduced spectrum of their trace norms, and the covariance-kernel
reconstruction from the spectral sequence.

A model is band limited: operators vanish above ``band_limit``, which
makes every series appearing in the covariance expansion a finite sum and
lets tests separate Monte Carlo error from truncation error exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import rng
from .harmonics import _legendre_table
from .operators import OperatorOnH, TruncatedSpace

_FRAME_TOL = 1e-10

FRAME_MODES = ("canonical", "random_orthogonal")


@dataclass(frozen=True)
class SpectralModel:
    """Sequence of PSD covariance operators indexed by degree.

    ``eigenvalues[ell, j-1]`` is the j-th eigenvalue at degree ell and
    ``frames[ell][:, j-1]`` the matching unit eigenvector; the degree-ell
    operator is the sum of eigenvalue-weighted eigenvector outer products.
    """

    space: TruncatedSpace
    band_limit: int
    eigenvalues: np.ndarray  # (band_limit+1, dim), nonnegative
    frames: np.ndarray       # (band_limit+1, dim, dim), orthonormal columns

    def __post_init__(self) -> None:
        lam = np.asarray(self.eigenvalues, dtype=float)
        frames = np.asarray(self.frames, dtype=float)
        d = self.space.dim
        if self.band_limit < 0:
            raise ValueError(f"band limit must be >= 0, got {self.band_limit}")
        if lam.shape != (self.band_limit + 1, d):
            raise ValueError(
                f"eigenvalue table shape {lam.shape} incompatible with "
                f"band limit {self.band_limit} and dimension {d}"
            )
        if frames.shape != (self.band_limit + 1, d, d):
            raise ValueError(f"frame stack shape {frames.shape} invalid")
        if np.any(lam < 0):
            raise ValueError("eigenvalues must be nonnegative")
        eye = np.eye(d)
        gram_err = float(np.max(np.abs(np.einsum("lji,ljk->lik", frames, frames) - eye)))
        if gram_err > _FRAME_TOL:
            raise ValueError(f"eigenvector frames not orthonormal (Gram error {gram_err:.3e})")
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "frames", frames)

    @property
    def dim(self) -> int:
        return self.space.dim


@dataclass(frozen=True)
class ReducedSpectrum:
    """Trace norms of the per-degree operators, a scalar spectral summary."""

    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if np.any(vals < 0):
            raise ValueError("reduced spectrum values must be nonnegative")
        object.__setattr__(self, "values", vals)


def _shifted_legendre_labels(dim: int) -> tuple[str, ...]:
    # Default interpretation of the truncated space: the first `dim`
    # shifted Legendre functions, an orthonormal family on [0, 1].
    return tuple(f"shifted_legendre_{j}" for j in range(1, dim + 1))


def _build_frames(band_limit: int, dim: int, frame_mode: str, frame_seed: int) -> np.ndarray:
    if frame_mode not in FRAME_MODES:
        raise ValueError(f"frame_mode must be one of {FRAME_MODES}, got {frame_mode!r}")
    if frame_mode == "canonical":
        return np.broadcast_to(np.eye(dim), (band_limit + 1, dim, dim)).copy()
    return np.stack(
        [rng.random_orthogonal(dim, frame_seed, ell) for ell in range(band_limit + 1)]
    )


def make_powerlaw_model(
    band_limit: int,
    dim: int,
    amplitude: float,
    alpha: float,
    beta: float,
    frame_mode: str = "canonical",
    frame_seed: int = 0,
) -> SpectralModel:
    """Power-law eigenvalue family lambda_{j;ell} = A (1+ell)^-alpha (1+j)^-beta.

    alpha > 2 keeps the (2ell+1)-weighted trace series summable in the
    un-truncated limit; beta > 1 keeps each operator nuclear.
    """
    if amplitude <= 0:
        raise ValueError(f"amplitude must be positive, got {amplitude}")
    if alpha <= 2:
        raise ValueError(f"alpha must exceed 2 for a summable spectrum, got {alpha}")
    if beta <= 1:
        raise ValueError(f"beta must exceed 1 for nuclear operators, got {beta}")
    if dim < 1 or band_limit < 0:
        raise ValueError(f"invalid dimensions: band_limit={band_limit}, dim={dim}")
    ells = np.arange(band_limit + 1, dtype=float)[:, None]
    js = np.arange(1, dim + 1, dtype=float)[None, :]
    lam = amplitude * (1.0 + ells) ** (-alpha) * (1.0 + js) ** (-beta)
    return SpectralModel(
        space=TruncatedSpace(dim=dim, basis_labels=_shifted_legendre_labels(dim)),
        band_limit=band_limit,
        eigenvalues=lam,
        frames=_build_frames(band_limit, dim, frame_mode, frame_seed),
    )


def make_model_from_table(
    lambda_table: np.ndarray,
    frame_mode: str = "canonical",
    frame_seed: int = 0,
) -> SpectralModel:
    """Model with an explicit eigenvalue table of shape (L_max+1, d)."""
    lam = np.atleast_2d(np.asarray(lambda_table, dtype=float))
    band_limit = lam.shape[0] - 1
    dim = lam.shape[1]
    return SpectralModel(
        space=TruncatedSpace(dim=dim, basis_labels=_shifted_legendre_labels(dim)),
        band_limit=band_limit,
        eigenvalues=lam,
        frames=_build_frames(band_limit, dim, frame_mode, frame_seed),
    )


def _check_degree(model: SpectralModel, ell: int) -> None:
    if not 0 <= ell <= model.band_limit:
        raise ValueError(f"degree {ell} outside model range [0, {model.band_limit}]")


def power_spectrum_operator(model: SpectralModel, ell: int) -> OperatorOnH:
    """The degree-ell covariance operator: self-adjoint, PSD, trace class."""
    _check_degree(model, ell)
    frame = model.frames[ell]
    entries = (frame * model.eigenvalues[ell][None, :]) @ frame.T
    entries = (entries + entries.T) / 2.0
    return OperatorOnH(space=model.space, entries=entries, self_adjoint=True)


def reduced_spectrum(model: SpectralModel) -> ReducedSpectrum:
    """Per-degree trace norms, i.e. eigenvalue sums."""
    return ReducedSpectrum(values=model.eigenvalues.sum(axis=1))


def kernel_reconstruct(model: SpectralModel, t: float, trunc_limit: int | None = None) -> OperatorOnH:
    """Covariance operator between field values at angular separation t.

    Sums (2l+1)/(4 pi) P_l(t) times the degree-l operator for
    l <= trunc_limit (default: the full band limit).  Self-adjoint for
    every t, and exact for band-limited models at full truncation.
    """
    if not -1.0 <= t <= 1.0:
        raise ValueError(f"angular separation must lie in [-1, 1], got {t}")
    if trunc_limit is None:
        trunc_limit = model.band_limit
    if not 0 <= trunc_limit <= model.band_limit:
        raise ValueError(
            f"truncation degree {trunc_limit} outside model range [0, {model.band_limit}]"
        )
    legendre = _legendre_table(trunc_limit, np.asarray([t], dtype=float))[:, 0]
    d = model.dim
    entries = np.zeros((d, d))
    for ell in range(trunc_limit + 1):
        coeff = (2 * ell + 1) / (4.0 * np.pi) * legendre[ell]
        frame = model.frames[ell]
        entries += coeff * ((frame * model.eigenvalues[ell][None, :]) @ frame.T)
    entries = (entries + entries.T) / 2.0
    return OperatorOnH(space=model.space, entries=entries, self_adjoint=True)


def field_variance(model: SpectralModel) -> float:
    """Pointwise second moment of the field: sum of C_l (2l+1)/(4 pi)."""
    weights = (2 * np.arange(model.band_limit + 1) + 1) / (4.0 * np.pi)
    return float(np.dot(reduced_spectrum(model).values, weights))


def reconstruction_tail_bound(model: SpectralModel, trunc_limit: int) -> float:
    """Trace-norm bound on the kernel truncation error, uniform in t."""
    if not 0 <= trunc_limit <= model.band_limit:
        raise ValueError(f"truncation degree {trunc_limit} out of range")
    ells = np.arange(model.band_limit + 1)
    tail = ells > trunc_limit
    weights = (2 * ells[tail] + 1) / (4.0 * np.pi)
    return float(np.dot(reduced_spectrum(model).values[tail], weights))


def mean_square_continuity_modulus(model: SpectralModel, t: float) -> float:
    """Expected squared increment between field values at separation t.

    Equals 2 tr(R_1) - 2 tr(R_t); nonnegative, and vanishing as t -> 1,
    which is the quantitative form of mean-square continuity.
    """
    if not -1.0 <= t <= 1.0:
        raise ValueError(f"angular separation must lie in [-1, 1], got {t}")
    legendre = _legendre_table(model.band_limit, np.asarray([t], dtype=float))[:, 0]
    weights = (2 * np.arange(model.band_limit + 1) + 1) / (4.0 * np.pi)
    c_ell = reduced_spectrum(model).values
    value = 2.0 * float(np.dot(c_ell, weights)) - 2.0 * float(np.dot(c_ell, weights * legendre))
    return max(value, 0.0)


def model_to_dict(model: SpectralModel) -> dict:
    """Canonical JSON-ready export of the eigenvalue table and frames."""
    return {
        "band_limit": model.band_limit,
        "dim": model.dim,
        "basis_labels": list(model.space.basis_labels) if model.space.basis_labels else None,
        "eigenvalues": model.eigenvalues.tolist(),
        "frames": model.frames.tolist(),
    }


def model_from_dict(data: dict) -> SpectralModel:
    labels = data.get("basis_labels")
    return SpectralModel(
        space=TruncatedSpace(dim=int(data["dim"]), basis_labels=tuple(labels) if labels else None),
        band_limit=int(data["band_limit"]),
        eigenvalues=np.asarray(data["eigenvalues"], dtype=float),
        frames=np.asarray(data["frames"], dtype=float),
    )


def save_model(model: SpectralModel, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, sort_keys=True, indent=1)


def load_model(path: str) -> SpectralModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
