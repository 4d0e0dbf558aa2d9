"""Spectral estimators: sample covariance operators per degree, their
trace estimator, and the normalized statistics whose limiting behavior
the verification suite checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .harmonics import analyze_grid
from .model import SpectralModel, power_spectrum_operator, reduced_spectrum
from .operators import OperatorOnH, TruncatedSpace, schatten_norm
from .sampler import CoefficientSet, FieldRealization

__all__ = [
    "SamplePowerSpectrum",
    "NormalizedStatistic",
    "analyze_field",
    "sample_power_spectrum",
    "reduced_estimator",
    "normalized_statistic",
]


@dataclass(frozen=True)
class SamplePowerSpectrum:
    """Average of the 2*ell+1 coefficient outer products at one degree."""

    ell: int
    operator: OperatorOnH
    dof: int


@dataclass(frozen=True)
class NormalizedStatistic:
    """Centered estimators rescaled to unit theoretical dispersion.

    ``operator_stat`` is sqrt((2l+1)/(||F||_2^2 + C^2)) (Fhat - F); its
    expected squared HS norm is exactly 1.  ``scalar_stat`` is
    sqrt((2l+1)/(2 ||F||_2^2)) (Chat - C); its variance is exactly 1.
    """

    ell: int
    operator_stat: OperatorOnH
    scalar_stat: float


def analyze_field(realization: FieldRealization, band_limit: int) -> CoefficientSet:
    """Recover harmonic coefficients from a gridded realization.

    Exact inverse of synthesis for band-limited fields on an exact grid.
    """
    if band_limit > realization.grid.band_limit:
        raise ValueError(
            f"analysis band limit {band_limit} exceeds grid band limit "
            f"{realization.grid.band_limit}"
        )
    vectors = analyze_grid(realization.values, realization.grid, band_limit)
    return CoefficientSet(band_limit=band_limit, dim=realization.dim, vectors=vectors)


def _degree_block(coeffs: CoefficientSet, ell: int) -> np.ndarray:
    if not 0 <= ell <= coeffs.band_limit:
        raise ValueError(f"degree {ell} outside coefficient range [0, {coeffs.band_limit}]")
    return coeffs.degree_block(ell)


def sample_power_spectrum(coeffs: CoefficientSet, ell: int) -> SamplePowerSpectrum:
    """Unbiased PSD estimate of the degree-ell covariance operator."""
    block = _degree_block(coeffs, ell)
    dof = 2 * ell + 1
    entries = block.T @ block / dof
    entries = (entries + entries.T) / 2.0
    op = OperatorOnH(space=TruncatedSpace(dim=coeffs.dim), entries=entries, self_adjoint=True)
    return SamplePowerSpectrum(ell=ell, operator=op, dof=dof)


def reduced_estimator(coeffs: CoefficientSet, ell: int) -> float:
    """Mean squared coefficient norm at one degree; estimates the trace norm."""
    block = _degree_block(coeffs, ell)
    return float(np.sum(block * block) / (2 * ell + 1))


def normalized_statistic(coeffs: CoefficientSet, model: SpectralModel, ell: int) -> NormalizedStatistic:
    """Centered and rescaled spectral estimators at one degree.

    Undefined when the true operator vanishes; such degrees carry no
    signal to normalize and are rejected.
    """
    truth = power_spectrum_operator(model, ell)
    hs_sq = schatten_norm(truth, 2.0) ** 2
    if hs_sq == 0.0:
        raise ValueError(f"degree {ell} has a zero spectral operator; statistic undefined")
    c_ell = float(reduced_spectrum(model).values[ell])
    sample = sample_power_spectrum(coeffs, ell)
    dof = 2 * ell + 1
    op_scale = np.sqrt(dof / (hs_sq + c_ell**2))
    operator_stat = OperatorOnH(
        space=truth.space,
        entries=op_scale * (sample.operator.entries - truth.entries),
        self_adjoint=True,
    )
    scalar_scale = np.sqrt(dof / (2.0 * hs_sq))
    scalar_stat = scalar_scale * (reduced_estimator(coeffs, ell) - c_ell)
    return NormalizedStatistic(ell=ell, operator_stat=operator_stat, scalar_stat=float(scalar_stat))
