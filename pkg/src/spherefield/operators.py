"""Operators on a truncated Hilbert space: Schatten norms, tensor products,
and the symmetric rank-<=2 basis that diagonalizes the spectral-estimator
covariance.

Everything here is finite dimensional: the ambient separable Hilbert space
is truncated to dimension d, and operators are stored as dense d x d
arrays in the canonical coordinates.  Truncation is exact by construction
for band-limited spectral models (eigenvalues are identically zero beyond
dimension d), so no truncation-error bookkeeping is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SYMMETRY_TOL = 1e-12
_FRAME_TOL = 1e-10
#: Relative floor below which singular values are treated as exact zeros
#: when evaluating p < 2 Schatten norms (avoids noise amplification in the
#: trace norm of nearly-singular operators).
_SINGULAR_CLAMP = 1e-13


@dataclass(frozen=True)
class TruncatedSpace:
    """Finite-dimensional stand-in for the ambient Hilbert space.

    ``basis_labels`` optionally names the coordinates, e.g. an orthonormal
    family on [0, 1] when field values are interpreted as functions.
    """

    dim: int
    basis_labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"space dimension must be >= 1, got {self.dim}")
        if self.basis_labels is not None and len(self.basis_labels) != self.dim:
            raise ValueError(
                f"got {len(self.basis_labels)} basis labels for dimension {self.dim}"
            )


@dataclass(frozen=True)
class OperatorOnH:
    """Bounded linear operator on a truncated space, in canonical coordinates."""

    space: TruncatedSpace
    entries: np.ndarray
    self_adjoint: bool = False

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=float)
        d = self.space.dim
        if entries.shape != (d, d):
            raise ValueError(f"expected {d}x{d} entries, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ValueError("operator entries must be finite")
        if self.self_adjoint:
            asym = float(np.max(np.abs(entries - entries.T))) if d > 1 else 0.0
            if asym > _SYMMETRY_TOL:
                raise ValueError(
                    f"operator flagged self-adjoint but asymmetry is {asym:.3e}"
                )
        object.__setattr__(self, "entries", entries)

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.entries @ np.asarray(f, dtype=float)


def identity_operator(space: TruncatedSpace) -> OperatorOnH:
    return OperatorOnH(space=space, entries=np.eye(space.dim), self_adjoint=True)


def operator_from_entries(entries: np.ndarray, self_adjoint: bool = False) -> OperatorOnH:
    entries = np.asarray(entries, dtype=float)
    return OperatorOnH(
        space=TruncatedSpace(dim=entries.shape[0]),
        entries=entries,
        self_adjoint=self_adjoint,
    )


def outer_product(u: np.ndarray, v: np.ndarray, space: TruncatedSpace | None = None) -> OperatorOnH:
    """Tensor product u (x) v, the map f -> u <f, v>."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError(f"vectors must share one dimension, got {u.shape} and {v.shape}")
    if space is None:
        space = TruncatedSpace(dim=u.shape[0])
    elif space.dim != u.shape[0]:
        raise ValueError(f"vectors of length {u.shape[0]} not in space of dim {space.dim}")
    return OperatorOnH(space=space, entries=np.outer(u, v), self_adjoint=bool(u is v or np.array_equal(u, v)))


def trace(op: OperatorOnH) -> float:
    return float(np.trace(op.entries))


def hs_inner(a: OperatorOnH, b: OperatorOnH) -> float:
    """Hilbert-Schmidt inner product <a, b>_2 = sum of entrywise products."""
    if a.space.dim != b.space.dim:
        raise ValueError(f"dimension mismatch: {a.space.dim} vs {b.space.dim}")
    return float(np.sum(a.entries * b.entries))


def singular_values(op: OperatorOnH) -> np.ndarray:
    """Singular values, descending; self-adjoint path uses eigh.

    Values below a relative floor of the operator norm are clamped to zero
    so that trace-norm sums do not accumulate rounding noise.
    """
    if op.self_adjoint:
        sigma = np.abs(np.linalg.eigvalsh(op.entries))
    else:
        sigma = np.linalg.svd(op.entries, compute_uv=False)
    sigma = np.sort(sigma)[::-1]
    if sigma[0] > 0.0:
        sigma[sigma < _SINGULAR_CLAMP * sigma[0]] = 0.0
    return sigma


def schatten_norm(op: OperatorOnH, p: float) -> float:
    """p-Schatten norm (sum sigma_i^p)^(1/p); p = inf gives the operator norm."""
    if not (p >= 1.0):
        raise ValueError(f"Schatten order must satisfy p >= 1, got {p}")
    sigma = singular_values(op)
    if np.isinf(p):
        return float(sigma[0])
    if p == 1.0:
        return float(np.sum(sigma))
    if p == 2.0:
        # Frobenius identity; exact and cheaper than the singular values.
        return float(np.sqrt(np.sum(op.entries * op.entries)))
    return float(np.sum(sigma**p) ** (1.0 / p))


def _check_orthonormal_frame(eigvecs: np.ndarray) -> np.ndarray:
    frame = np.asarray(eigvecs, dtype=float)
    if frame.ndim != 2 or frame.shape[0] != frame.shape[1]:
        raise ValueError(f"eigenvector frame must be square, got shape {frame.shape}")
    gram_err = float(np.max(np.abs(frame.T @ frame - np.eye(frame.shape[0]))))
    if gram_err > _FRAME_TOL:
        raise ValueError(f"eigenvector frame is not orthonormal (Gram error {gram_err:.3e})")
    return frame


@dataclass(frozen=True)
class SymBasisElement:
    """Unit Hilbert-Schmidt, self-adjoint basis operator E_{j,j'}.

    E is e_j (x) e_j on the diagonal (j = j') and the symmetrized pair
    (e_j (x) e_j' + e_j' (x) e_j)/sqrt(2) off the diagonal.  Across
    distinct (j, j') pairs these are HS-orthonormal, and for a space of
    dimension d the d(d+1)/2 of them span the self-adjoint operators.
    """

    j: int
    j_prime: int
    operator: OperatorOnH


def sym_basis(j: int, j_prime: int, eigvecs: np.ndarray) -> SymBasisElement:
    """Build E_{j,j'} from columns j, j' (1-based) of an orthonormal frame."""
    if not (j >= j_prime >= 1):
        raise ValueError(f"need j >= j' >= 1, got j={j}, j'={j_prime}")
    frame = _check_orthonormal_frame(eigvecs)
    d = frame.shape[0]
    if j > d:
        raise ValueError(f"index j={j} exceeds frame dimension {d}")
    e_j = frame[:, j - 1]
    e_jp = frame[:, j_prime - 1]
    if j == j_prime:
        entries = np.outer(e_j, e_j)
    else:
        entries = (np.outer(e_j, e_jp) + np.outer(e_jp, e_j)) / np.sqrt(2.0)
    op = OperatorOnH(space=TruncatedSpace(dim=d), entries=entries, self_adjoint=True)
    return SymBasisElement(j=j, j_prime=j_prime, operator=op)


def sym_basis_pairs(dim: int) -> list[tuple[int, int]]:
    """Canonical (j, j') enumeration with j >= j', 1-based, j-major."""
    return [(j, jp) for j in range(1, dim + 1) for jp in range(1, j + 1)]


def sym_basis_tensor(eigvecs: np.ndarray) -> np.ndarray:
    """All E_{j,j'} stacked as an array of shape (d(d+1)/2, d, d).

    Row order follows :func:`sym_basis_pairs`.
    """
    frame = _check_orthonormal_frame(eigvecs)
    d = frame.shape[0]
    pairs = sym_basis_pairs(d)
    out = np.empty((len(pairs), d, d), dtype=float)
    for row, (j, jp) in enumerate(pairs):
        e_j = frame[:, j - 1]
        e_jp = frame[:, jp - 1]
        if j == jp:
            out[row] = np.outer(e_j, e_j)
        else:
            out[row] = (np.outer(e_j, e_jp) + np.outer(e_jp, e_j)) / np.sqrt(2.0)
    return out


@dataclass(frozen=True)
class CltCovariance:
    """Covariance of the centered, sqrt(2l+1)-scaled spectral estimator.

    Stored in its own eigenbasis: the symmetric basis elements E_{j,j'}
    with variances 2 lambda_j lambda_j' (j >= j').  Never materialized as
    a dense d^2 x d^2 array.
    """

    ell: int
    eigenpairs: tuple[tuple[tuple[int, int], float], ...]
    basis: tuple[SymBasisElement, ...]

    @property
    def trace(self) -> float:
        return float(sum(v for _, v in self.eigenpairs))

    @property
    def hs_norm_sq(self) -> float:
        return float(sum(v * v for _, v in self.eigenpairs))


def clt_covariance(eigenvalues: np.ndarray, eigvecs: np.ndarray, ell: int = 0) -> CltCovariance:
    """Covariance operator 2 sum_{j>=j'} lambda_j lambda_j' E (x) E.

    Its trace equals ||F||_2^2 + (tr F)^2 and its squared HS norm equals
    2 (||F||_4^4 + ||F||_2^4), where F has the given eigenvalues.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.ndim != 1:
        raise ValueError("eigenvalues must be a flat vector")
    if np.any(lam < 0):
        raise ValueError("eigenvalues must be nonnegative")
    frame = _check_orthonormal_frame(eigvecs)
    if frame.shape[0] != lam.shape[0]:
        raise ValueError(
            f"{lam.shape[0]} eigenvalues incompatible with frame of dim {frame.shape[0]}"
        )
    pairs = sym_basis_pairs(lam.shape[0])
    eigenpairs = []
    basis = []
    for j, jp in pairs:
        eigenpairs.append(((j, jp), float(2.0 * lam[j - 1] * lam[jp - 1])))
        basis.append(sym_basis(j, jp, frame))
    return CltCovariance(ell=ell, eigenpairs=tuple(eigenpairs), basis=tuple(basis))
