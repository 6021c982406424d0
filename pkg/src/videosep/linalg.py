"""Dense linear-algebra primitives used by the decomposition code.

Thin wrappers over LAPACK (via numpy) that pin down the contracts the rest
of the package relies on: truncation rules for the thin SVD, residual
guarantees for the dense eigensolver, and an SVD-based least-squares solve.
All functions are pure; matrices are treated as immutable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate a 2-D, non-empty, all-finite array and return it as float/complex."""
    arr = np.asarray(a)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.complexfloating):
        arr = arr.astype(np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class ThinSvd:
    """Truncated singular value decomposition a ~= u @ diag(sigma) @ v.T.

    u is n x ell with orthonormal columns, sigma is length ell and
    nonincreasing, v is cols x ell with orthonormal columns.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    @property
    def rank(self) -> int:
        return len(self.sigma)


def thin_svd(a, rank_tolerance: float = 0.0) -> ThinSvd:
    """Thin SVD truncated to singular values above ``rank_tolerance * sigma_1``.

    Keeps the ell singular triplets with sigma_j > rank_tolerance * sigma_1;
    at least one triplet is always returned (ell = 1 with sigma_1 = 0 for a
    zero matrix), so downstream code never sees an empty factorization.
    """
    arr = as_matrix(a)
    if not 0.0 <= rank_tolerance < 1.0:
        raise ValueError(f"rank_tolerance must be in [0, 1), got {rank_tolerance}")
    u, s, vh = np.linalg.svd(arr, full_matrices=False)
    ell = int(np.count_nonzero(s > rank_tolerance * s[0]))
    ell = max(ell, 1)
    return ThinSvd(u=u[:, :ell], sigma=s[:ell], v=vh[:ell].conj().T)


def eig_dense(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and unit-norm eigenvectors of a small dense square matrix."""
    arr = as_matrix(a)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"eigendecomposition needs a square matrix, got {arr.shape}")
    values, vectors = np.linalg.eig(arr)
    return values, vectors


def least_squares(a, rhs) -> np.ndarray:
    """Minimizer of ||a @ x - rhs||_2 via the SVD-based pseudo-inverse.

    Deliberately avoids forming the normal equations so rank-deficient
    systems stay well behaved.
    """
    arr = as_matrix(a, "coefficient matrix")
    b = np.asarray(rhs)
    if b.ndim != 1:
        raise DimensionError(f"right-hand side must be 1-D, got shape {b.shape}")
    if b.shape[0] != arr.shape[0]:
        raise DimensionError(
            f"right-hand side length {b.shape[0]} does not match {arr.shape[0]} rows"
        )
    x, *_ = np.linalg.lstsq(arr, b, rcond=None)
    return x
