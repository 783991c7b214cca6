"""Dense symmetric linear algebra: eigendecomposition, pseudoinverse,
projection onto the positive semi-definite cone, and SPD solves.

Everything here works on plain numpy arrays and is safe for concurrent
calls on distinct inputs.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from .errors import NotPositiveDefiniteError

DEFAULT_RANK_TOL = 1e-10
SYMMETRY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SymEig:
    """Eigendecomposition A = U.T @ diag(d) @ U with eigenvectors in the
    rows of U and eigenvalues sorted in descending order."""

    U: np.ndarray
    d: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.U.T * self.d) @ self.U


def _check_square_symmetric(A: np.ndarray, tol: float = SYMMETRY_TOL) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite entries")
    scale = max(1.0, float(np.max(np.abs(A))) if A.size else 1.0)
    asym = float(np.max(np.abs(A - A.T))) if A.size else 0.0
    if asym > tol * scale:
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    # repair floating-point asymmetry before any decomposition
    return 0.5 * (A + A.T)


def sym_eig(A: np.ndarray) -> SymEig:
    """Eigendecompose a symmetric matrix, eigenvalues descending."""
    A = _check_square_symmetric(A)
    d, V = np.linalg.eigh(A)  # ascending, eigenvectors in columns
    order = np.argsort(d)[::-1]
    return SymEig(U=V[:, order].T.copy(), d=d[order].copy())


def pseudo_inverse(A: np.ndarray, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Moore-Penrose inverse of a symmetric PSD matrix.

    Eigenvalues below ``rank_tol * max(d)`` are treated as exact zeros.
    """
    eig = sym_eig(A)
    d_max = float(eig.d[0]) if eig.d.size else 0.0
    threshold = rank_tol * max(d_max, 0.0)
    keep = eig.d > threshold
    d_inv = np.zeros_like(eig.d)
    d_inv[keep] = 1.0 / eig.d[keep]
    out = (eig.U.T * d_inv) @ eig.U
    return 0.5 * (out + out.T)


def psd_project(A: np.ndarray, rank: int | None = None) -> np.ndarray:
    """Project a symmetric matrix onto the PSD cone by clipping negative
    eigenvalues at zero; with ``rank`` given, additionally keep only the
    ``rank`` largest clipped eigenvalues.

    Without ``rank`` this is the Frobenius-nearest PSD matrix.
    """
    eig = sym_eig(A)
    n = eig.d.size
    if rank is not None and not (0 <= rank <= n):
        raise ValueError(f"rank must be in [0, {n}], got {rank}")
    d_clip = np.maximum(eig.d, 0.0)
    if rank is not None:
        d_clip = d_clip.copy()
        d_clip[rank:] = 0.0  # eigenvalues sorted descending
    out = (eig.U.T * d_clip) @ eig.U
    return 0.5 * (out + out.T)


def spd_solve(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve A @ X = B for symmetric positive definite A via Cholesky."""
    A = _check_square_symmetric(A)
    B = np.asarray(B, dtype=float)
    try:
        factor = cho_factor(A, lower=True)
    except LinAlgError:
        evals = np.linalg.eigvalsh(A)
        raise NotPositiveDefiniteError(
            f"matrix is not positive definite (smallest eigenvalue {evals[0]:.6e})",
            min_eigenvalue=float(evals[0]),
        ) from None
    return cho_solve(factor, B)
