"""Tolerance-aware dense complex linear algebra.

Every operator in this package is carried by a dense complex matrix
(``numpy.ndarray`` with ``dtype=complex128``).  Zero-dimensional shapes such
as ``(0, k)`` are first-class citizens: degenerate subspace splits occur
routinely in the reduction pipeline and all routines here accept them.

Complements are always orthogonal complements, extracted from a full SVD, so
every :class:`SubspaceBasis` produced here has orthonormal columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, PreconditionError, ShapeError, SingularMatrixError

EPS = float(np.finfo(np.float64).eps)


def _svd_full(a: np.ndarray):
    try:
        return np.linalg.svd(a, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD of shape {a.shape} failed: {exc}") from exc


def _svd_vals(a: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD of shape {a.shape} failed: {exc}") from exc


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a 2-d complex128 array and validate its entries.

    Raises
    ------
    ShapeError
        If ``a`` is not two-dimensional.
    PreconditionError
        If any entry is NaN or infinite.
    """
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ShapeError(f"expected a 2-d matrix, got ndim={m.ndim}")
    if m.size and not np.all(np.isfinite(m)):
        raise PreconditionError("matrix contains non-finite entries")
    return m


def adjoint(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def spectral_norm(a) -> float:
    """Largest singular value; 0.0 for matrices with a zero dimension."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def rel_residual(lhs, rhs) -> float:
    """Relative residual ``||lhs - rhs|| / max(1, ||rhs||)`` in spectral norm."""
    lhs = np.asarray(lhs, dtype=np.complex128)
    rhs = np.asarray(rhs, dtype=np.complex128)
    if lhs.shape != rhs.shape:
        raise ShapeError(f"residual of mismatched shapes {lhs.shape} vs {rhs.shape}")
    return spectral_norm(lhs - rhs) / max(1.0, spectral_norm(rhs))


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.complex128)


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.complex128)


def default_rank_tol(a: np.ndarray, singulars: np.ndarray) -> float:
    """Standard SVD rank cutoff ``max(rows, cols) * eps * sigma_max``."""
    sigma_max = float(singulars[0]) if singulars.size else 0.0
    return max(a.shape) * EPS * sigma_max if a.size else 0.0


@dataclass(frozen=True)
class SvdResult:
    """Full singular value decomposition ``a = left @ diag(singulars) @ right*``.

    ``left`` (rows x rows) and ``right`` (cols x cols) are unitary; ``singulars``
    holds the ``min(rows, cols)`` singular values in non-increasing order.
    ``rank_tol`` is the default cutoff separating numerical rank from noise.
    """

    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray
    rank_tol: float

    def rank(self, tol: float | None = None) -> int:
        cut = self.rank_tol if tol is None else tol
        return int(np.count_nonzero(self.singulars > cut))

    def reconstruct(self) -> np.ndarray:
        k = self.singulars.size
        return (self.left[:, :k] * self.singulars) @ adjoint(self.right[:, :k])


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal basis of a subspace of C^ambient_dim, columns spanning it."""

    ambient_dim: int
    basis: np.ndarray  # ambient_dim x dim, orthonormal columns
    dim: int

    def __post_init__(self):
        if self.basis.shape != (self.ambient_dim, self.dim):
            raise ShapeError(
                f"basis shape {self.basis.shape} does not match "
                f"({self.ambient_dim}, {self.dim})"
            )
        if self.dim > self.ambient_dim:
            raise ShapeError("subspace dimension exceeds ambient dimension")


def svd(a) -> SvdResult:
    """Full SVD with unitary factors and the default rank cutoff attached.

    Parameters
    ----------
    a : array_like
        Matrix with finite entries; zero-dimension shapes are allowed.

    Returns
    -------
    SvdResult
    """
    a = as_matrix(a)
    left, s, right_h = _svd_full(a)
    return SvdResult(left=left, singulars=s, right=adjoint(right_h),
                     rank_tol=default_rank_tol(a, s))


def rank_of(a, tol: float | None = None) -> int:
    """Numerical rank: number of singular values above the cutoff.

    The cutoff is ``max(rows, cols) * eps * sigma_max`` unless ``tol``
    supplies an absolute override.
    """
    a = as_matrix(a)
    if a.size == 0:
        return 0
    s = _svd_vals(a)
    cut = default_rank_tol(a, s) if tol is None else tol
    return int(np.count_nonzero(s > cut))


def pinv(a, tol: float | None = None) -> np.ndarray:
    """Moore-Penrose pseudoinverse via SVD with rank cutoff ``tol``."""
    a = as_matrix(a)
    if a.size == 0:
        return zeros(a.shape[1], a.shape[0])
    res = svd(a)
    cut = res.rank_tol if tol is None else tol
    r = int(np.count_nonzero(res.singulars > cut))
    if r == 0:
        return zeros(a.shape[1], a.shape[0])
    inv_s = 1.0 / res.singulars[:r]
    return (res.right[:, :r] * inv_s) @ adjoint(res.left[:, :r])


def subspaces(a, tol: float | None = None):
    """Orthonormal bases of the four fundamental subspaces of ``a``.

    Returns
    -------
    (kernel, kernel_complement, range_, range_complement) : SubspaceBasis
        ``kernel + kernel_complement`` split the domain C^cols;
        ``range_ + range_complement`` split the codomain C^rows.  The
        restriction of ``a`` mapping ``kernel_complement`` onto ``range_``
        is invertible.
    """
    a = as_matrix(a)
    rows, cols = a.shape
    res = svd(a)
    r = res.rank(tol)
    kernel = SubspaceBasis(cols, res.right[:, r:], cols - r)
    kernel_complement = SubspaceBasis(cols, res.right[:, :r], r)
    range_ = SubspaceBasis(rows, res.left[:, :r], r)
    range_complement = SubspaceBasis(rows, res.left[:, r:], rows - r)
    return kernel, kernel_complement, range_, range_complement


def inverse(a, tol: float | None = None):
    """Inverse of a square matrix together with its condition number.

    Returns
    -------
    (inv, condition) : (ndarray, float)
        ``condition = sigma_max / sigma_min``; a 0x0 matrix has condition 1.

    Raises
    ------
    SingularMatrixError
        If the smallest singular value falls below the rank cutoff.
    """
    a = as_matrix(a)
    rows, cols = a.shape
    if rows != cols:
        raise ShapeError(f"inverse of non-square matrix {a.shape}")
    if rows == 0:
        return zeros(0, 0), 1.0
    s = _svd_vals(a)
    cut = default_rank_tol(a, s) if tol is None else tol
    sigma_min = float(s[-1])
    if sigma_min <= cut:
        raise SingularMatrixError(
            f"matrix of shape {a.shape} is numerically singular "
            f"(sigma_min={sigma_min:.3e}, cutoff={cut:.3e})",
            sigma_min=sigma_min,
        )
    return np.linalg.inv(a), float(s[0]) / sigma_min
