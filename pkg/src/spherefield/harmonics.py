"""Real spherical harmonics, Legendre polynomials, and exact quadrature on S^2.

Conventions
-----------
The real fully-normalized spherical harmonics used throughout this package
are

    Y_{l,0}(theta, phi)  = p_{l,0}(cos theta)
    Y_{l,m}(theta, phi)  = sqrt(2) * p_{l,m}(cos theta) * cos(m phi),   m > 0
    Y_{l,-m}(theta, phi) = sqrt(2) * p_{l,m}(cos theta) * sin(m phi),   m > 0

where p_{l,m} is the associated Legendre function normalized so that the
family is orthonormal in L^2(S^2) (the constant harmonic is
Y_{0,0} = 1/sqrt(4 pi)).  The Condon-Shortley phase is excluded.  Any real
orthonormal basis of each degree space satisfies the addition formula

    sum_m Y_{l,m}(x) Y_{l,m}(y) = (2l+1)/(4 pi) * P_l(<x, y>),

which is the identity the test suite pins this convention against.

The p_{l,m} are evaluated with the normalized three-term recurrence

    p_{m,m}   = sqrt((2m+1)/(2m)) * sin(theta) * p_{m-1,m-1}
    p_{l,m}   = a_{l,m} * (z * p_{l-1,m} - b_{l,m} * p_{l-2,m})
    a_{l,m}   = sqrt((4 l^2 - 1) / (l^2 - m^2))
    b_{l,m}   = sqrt(((l-1)^2 - m^2) / (4 (l-1)^2 - 1))

which keeps every intermediate bounded and is stable far beyond degree
1000 (unnormalized recurrences overflow near degree 150).

Quadrature grids are Gauss-Legendre in cos(theta) crossed with uniform
longitudes: (L+1) x (2L+1) nodes integrate every product of two harmonics
of degree <= L exactly (the longitude rule is exact for Fourier modes up
to 2L, the Gauss rule for polynomials up to degree 2L+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

#: Largest band limit a grid will be built for; above this the node count
#: (L+1)(2L+1) makes dense transforms unreasonable on one machine.
MAX_BAND_LIMIT = 4096

_UNIT_NORM_TOL = 1e-10


class BandLimitError(RuntimeError):
    """Requested band limit exceeds the configured maximum."""


@dataclass(frozen=True)
class HarmonicIndex:
    """Degree/order pair (ell, m) with |m| <= ell, ell >= 0."""

    ell: int
    m: int

    def __post_init__(self) -> None:
        if self.ell < 0:
            raise ValueError(f"degree must be >= 0, got ell={self.ell}")
        if abs(self.m) > self.ell:
            raise ValueError(f"order out of range: |m|={abs(self.m)} > ell={self.ell}")


@dataclass(frozen=True)
class LegendreValues:
    """Legendre polynomial values P_0..P_degree_max at a single argument."""

    degree_max: int
    argument: float
    values: np.ndarray


@dataclass(frozen=True)
class SphericalGrid:
    """Product quadrature grid on S^2, exact for band-limited integrands.

    Nodes are ordered colatitude-major: node index i * n_phi + k refers to
    the i-th Gauss-Legendre colatitude and the k-th uniform longitude.
    """

    band_limit: int
    nodes: np.ndarray        # (n, 3) unit vectors
    weights: np.ndarray      # (n,) positive, summing to 4 pi
    cos_colat: np.ndarray    # (L+1,) Gauss-Legendre nodes in cos(theta)
    gl_weights: np.ndarray   # (L+1,) Gauss-Legendre weights (sum to 2)
    longitudes: np.ndarray   # (2L+1,) uniform angles in [0, 2 pi)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]


def lm_index(ell: int, m: int) -> int:
    """Flat position of (ell, m) in the degree-major coefficient layout."""
    return ell * ell + ell + m


def num_coefficients(band_limit: int) -> int:
    return (band_limit + 1) ** 2


def band_limit_from_size(n_coeff: int) -> int:
    """Inverse of :func:`num_coefficients`; rejects incomplete layouts."""
    root = math.isqrt(n_coeff)
    if root * root != n_coeff or n_coeff == 0:
        raise ValueError(
            f"coefficient vector of length {n_coeff} is not a complete "
            f"(L+1)^2 layout; entries are missing"
        )
    return root - 1


def legendre_all(degree_max: int, z: float) -> LegendreValues:
    """Evaluate P_0(z)..P_degree_max(z) by the three-term recurrence.

    Exact endpoints P_l(1) = 1 and P_l(-1) = (-1)^l are reproduced to
    machine precision; |P_l| <= 1 holds on [-1, 1] for all degrees.
    """
    if degree_max < 0:
        raise ValueError(f"degree_max must be >= 0, got {degree_max}")
    if not -1.0 <= z <= 1.0:
        raise ValueError(f"Legendre argument must lie in [-1, 1], got {z}")
    values = _legendre_table(degree_max, np.asarray([z], dtype=float))[:, 0]
    return LegendreValues(degree_max=degree_max, argument=float(z), values=values)


def _legendre_table(degree_max: int, z: np.ndarray) -> np.ndarray:
    """P_l(z_i) for l = 0..degree_max; shape (degree_max+1, len(z))."""
    table = np.empty((degree_max + 1, z.shape[0]), dtype=float)
    table[0] = 1.0
    if degree_max >= 1:
        table[1] = z
    for ell in range(2, degree_max + 1):
        table[ell] = ((2 * ell - 1) * z * table[ell - 1] - (ell - 1) * table[ell - 2]) / ell
    return table


def _norm_assoc_legendre(band_limit: int, z: np.ndarray) -> list[np.ndarray]:
    """Normalized associated Legendre tables p_{l,m}(z).

    Returns a list indexed by order m; entry m has shape
    (band_limit - m + 1, len(z)) with row l - m holding p_{l,m}(z).
    Normalization: Y_{l,0} = p_{l,0}, so p_{0,0} = 1/sqrt(4 pi).
    """
    sin_theta = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    diag = np.full(z.shape, 1.0 / math.sqrt(4.0 * math.pi))
    tables: list[np.ndarray] = []
    for m in range(band_limit + 1):
        if m > 0:
            diag = math.sqrt((2 * m + 1) / (2 * m)) * sin_theta * diag
        block = np.empty((band_limit - m + 1, z.shape[0]), dtype=float)
        block[0] = diag
        if band_limit >= m + 1:
            block[1] = math.sqrt(2 * m + 3) * z * diag
        for ell in range(m + 2, band_limit + 1):
            a = math.sqrt((4 * ell * ell - 1) / (ell * ell - m * m))
            b = math.sqrt(((ell - 1) ** 2 - m * m) / (4 * (ell - 1) ** 2 - 1))
            block[ell - m] = a * (z * block[ell - m - 1] - b * block[ell - m - 2])
        tables.append(block)
    return tables


def _check_unit_points(points: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[-1] != 3:
        raise ValueError(f"points must be 3-vectors, got shape {pts.shape}")
    norms = np.linalg.norm(pts, axis=-1)
    if np.any(np.abs(norms - 1.0) > _UNIT_NORM_TOL):
        worst = float(np.max(np.abs(norms - 1.0)))
        raise ValueError(f"points must be unit vectors (max norm deviation {worst:.3e})")
    return pts


def sph_harm_matrix(band_limit: int, points: np.ndarray) -> np.ndarray:
    """Evaluate all Y_{l,m}, l <= band_limit, at unit vectors.

    Returns shape (n_points, (band_limit+1)^2) with columns in the
    :func:`lm_index` layout.
    """
    pts = _check_unit_points(points)
    z = np.clip(pts[:, 2], -1.0, 1.0)
    phi = np.arctan2(pts[:, 1], pts[:, 0])
    tables = _norm_assoc_legendre(band_limit, z)
    out = np.zeros((pts.shape[0], num_coefficients(band_limit)), dtype=float)
    ells = np.arange(band_limit + 1)
    out[:, ells * ells + ells] = tables[0].T
    sqrt2 = math.sqrt(2.0)
    for m in range(1, band_limit + 1):
        cos_m = np.cos(m * phi)
        sin_m = np.sin(m * phi)
        for ell in range(m, band_limit + 1):
            p = tables[m][ell - m]
            out[:, lm_index(ell, m)] = sqrt2 * p * cos_m
            out[:, lm_index(ell, -m)] = sqrt2 * p * sin_m
    return out


def sph_harm(index: HarmonicIndex, point: np.ndarray) -> float:
    """Single real spherical harmonic Y_{ell,m} at one unit vector."""
    row = sph_harm_matrix(index.ell, point)
    return float(row[0, lm_index(index.ell, index.m)])


def build_grid(band_limit: int, max_band_limit: int = MAX_BAND_LIMIT) -> SphericalGrid:
    """Gauss-Legendre x equiangular grid of size (L+1) x (2L+1).

    The weights are products of Gauss-Legendre weights with the uniform
    longitude weight 2 pi / (2L+1); they sum to 4 pi, and the grid
    integrates products Y_{l,m} Y_{l',m'} exactly for l, l' <= L.
    """
    if band_limit < 0:
        raise ValueError(f"band limit must be >= 0, got {band_limit}")
    if band_limit > max_band_limit:
        raise BandLimitError(
            f"band limit {band_limit} exceeds configured maximum {max_band_limit}"
        )
    z, glw = roots_legendre(band_limit + 1)
    n_phi = 2 * band_limit + 1
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    sin_theta = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    x = np.outer(sin_theta, np.cos(phi))
    y = np.outer(sin_theta, np.sin(phi))
    zz = np.broadcast_to(z[:, None], x.shape)
    nodes = np.stack([x.ravel(), y.ravel(), zz.ravel()], axis=1)
    weights = np.repeat(glw * (2.0 * math.pi / n_phi), n_phi)
    return SphericalGrid(
        band_limit=band_limit,
        nodes=nodes,
        weights=weights,
        cos_colat=z,
        gl_weights=glw,
        longitudes=phi,
    )


def _longitude_basis(band_limit: int, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """cos(m phi_k) and sin(m phi_k) tables of shape (L+1, n_phi)."""
    m = np.arange(band_limit + 1)[:, None]
    return np.cos(m * phi[None, :]), np.sin(m * phi[None, :])


def synthesize_grid(coeffs: np.ndarray, grid: SphericalGrid) -> np.ndarray:
    """Band-limited synthesis on a product grid, one column per channel.

    ``coeffs`` has shape ((L+1)^2,) or ((L+1)^2, k); the result has shape
    (n_nodes,) or (n_nodes, k).  Uses the separable colatitude/longitude
    factorization, so memory stays O(L^2) instead of O(L^4).
    """
    c = np.asarray(coeffs, dtype=float)
    squeeze = c.ndim == 1
    if squeeze:
        c = c[:, None]
    L = band_limit_from_size(c.shape[0])
    if L > grid.band_limit:
        raise ValueError(
            f"coefficient band limit {L} exceeds grid band limit {grid.band_limit}"
        )
    tables = _norm_assoc_legendre(L, grid.cos_colat)
    cos_tab, sin_tab = _longitude_basis(L, grid.longitudes)
    n_theta, n_phi = grid.cos_colat.shape[0], grid.longitudes.shape[0]
    k = c.shape[1]
    ells = np.arange(L + 1)
    out = np.empty((n_theta, n_phi, k), dtype=float)
    sqrt2 = math.sqrt(2.0)
    for ch in range(k):
        # g_cos[m, i] / g_sin[m, i]: colatitude profiles per order.
        g_cos = np.zeros((L + 1, n_theta))
        g_sin = np.zeros((L + 1, n_theta))
        g_cos[0] = c[ells * ells + ells, ch] @ tables[0]
        for m in range(1, L + 1):
            rows = np.arange(m, L + 1)
            g_cos[m] = sqrt2 * (c[rows * rows + rows + m, ch] @ tables[m])
            g_sin[m] = sqrt2 * (c[rows * rows + rows - m, ch] @ tables[m])
        out[:, :, ch] = g_cos.T @ cos_tab[: L + 1] + g_sin.T @ sin_tab[: L + 1]
    flat = out.reshape(n_theta * n_phi, k)
    return flat[:, 0] if squeeze else flat


def analyze_grid(values: np.ndarray, grid: SphericalGrid, band_limit: int) -> np.ndarray:
    """Quadrature analysis: coefficients of node samples, per channel.

    Computes sum_i w_i * f(x_i) * Y_{l,m}(x_i) for every (l, m) with
    l <= band_limit, via the same separable factorization as synthesis.
    ``values`` has shape (n_nodes,) or (n_nodes, k).
    """
    if band_limit > grid.band_limit:
        raise ValueError(
            f"analysis band limit {band_limit} exceeds grid band limit {grid.band_limit}"
        )
    v = np.asarray(values, dtype=float)
    squeeze = v.ndim == 1
    if squeeze:
        v = v[:, None]
    if v.shape[0] != grid.n_nodes:
        raise ValueError(
            f"sample count {v.shape[0]} does not match grid node count {grid.n_nodes}"
        )
    L = band_limit
    n_theta, n_phi = grid.cos_colat.shape[0], grid.longitudes.shape[0]
    k = v.shape[1]
    tables = _norm_assoc_legendre(L, grid.cos_colat)
    cos_tab, sin_tab = _longitude_basis(L, grid.longitudes)
    w_phi = 2.0 * math.pi / n_phi
    out = np.zeros((num_coefficients(L), k), dtype=float)
    ells = np.arange(L + 1)
    sqrt2 = math.sqrt(2.0)
    for ch in range(k):
        f = v[:, ch].reshape(n_theta, n_phi)
        # Longitude stage: h[m, i] = sum_k w_phi f(i, k) trig(m phi_k).
        h_cos = w_phi * (cos_tab[: L + 1] @ f.T)
        h_sin = w_phi * (sin_tab[: L + 1] @ f.T)
        weighted = grid.gl_weights[None, :]
        out[ells * ells + ells, ch] = (tables[0] * weighted) @ h_cos[0]
        for m in range(1, L + 1):
            rows = np.arange(m, L + 1)
            proj = (tables[m] * weighted)
            out[rows * rows + rows + m, ch] = sqrt2 * (proj @ h_cos[m])
            out[rows * rows + rows - m, ch] = sqrt2 * (proj @ h_sin[m])
    return out[:, 0] if squeeze else out


def analyze_scalar(samples: np.ndarray, grid: SphericalGrid, band_limit: int) -> np.ndarray:
    """Harmonic coefficients of a scalar function sampled on the grid."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 1:
        raise ValueError("analyze_scalar expects a flat array of node samples")
    return analyze_grid(samples, grid, band_limit)


def synthesize_scalar(coeffs: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Evaluate sum_{l,m} c_{l,m} Y_{l,m} at arbitrary unit vectors."""
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1:
        raise ValueError("synthesize_scalar expects a flat coefficient vector")
    L = band_limit_from_size(c.shape[0])
    return sph_harm_matrix(L, points) @ c
