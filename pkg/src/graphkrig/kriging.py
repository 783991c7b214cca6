"""Minimum-MSE linear prediction of a Gaussian signal on graph nodes from
noisy partial observations.

The signal Z has mean mu * X and covariance Psi = delta_inv * X X' + Sigma;
observations are Y = Z + noise with diagonal noise covariance Gamma. Large
``delta_inv`` makes the prior diffuse along X, leaving fluctuations in that
direction unpenalized.

The diffuse rank-one term is handled with a Sherman-Morrison update around
a Cholesky factorization of Sigma_00 + Gamma_00, so predictions stay
accurate even at delta_inv = 1e12 (a direct solve on the assembled
covariance loses ~delta_inv * eps of relative accuracy, which is visible
at that scale).
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from .errors import NotPositiveDefiniteError

# numerical stand-in for a diffuse-prior limit
DELTA_INV_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class KrigingModel:
    """Gaussian model for the node signal.

    X is the mean (and diffuse-prior) direction, ``mu`` its scale, Sigma
    the proper part of the signal covariance, ``delta_inv`` the variance
    multiplier of the diffuse direction, and ``gamma`` the diagonal of the
    noise covariance.
    """

    X: np.ndarray
    mu: float
    Sigma: np.ndarray
    gamma: np.ndarray
    delta_inv: float = 0.0

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Sigma = np.asarray(self.Sigma, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float)
        n = X.shape[0]
        if Sigma.shape != (n, n):
            raise ValueError(f"Sigma shape {Sigma.shape} does not match X length {n}")
        if gamma.shape != (n,):
            raise ValueError("gamma must be the diagonal of the noise covariance, length n")
        if np.any(gamma < 0):
            raise ValueError("noise variances must be nonnegative")
        if self.delta_inv < 0:
            raise ValueError("delta_inv must be nonnegative")
        scale = max(1.0, float(np.max(np.abs(Sigma))))
        if float(np.max(np.abs(Sigma - Sigma.T))) > 1e-8 * scale:
            raise ValueError("Sigma must be symmetric")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Sigma", 0.5 * (Sigma + Sigma.T))
        object.__setattr__(self, "gamma", gamma)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def psi(self) -> np.ndarray:
        """Assembled signal covariance delta_inv * X X' + Sigma."""
        return self.delta_inv * np.outer(self.X, self.X) + self.Sigma


@dataclass(frozen=True, eq=False)
class PartitionedData:
    """Observed node indices and their values, in any order."""

    observed_idx: np.ndarray
    y_obs: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.observed_idx, dtype=int)
        y = np.asarray(self.y_obs, dtype=float)
        if idx.ndim != 1 or y.shape != idx.shape:
            raise ValueError("observed_idx and y_obs must be 1-d and the same length")
        if idx.size < 1:
            raise ValueError("at least one node must be observed")
        if len(np.unique(idx)) != idx.size:
            raise ValueError("observed indices must be distinct")
        object.__setattr__(self, "observed_idx", idx)
        object.__setattr__(self, "y_obs", y)

    @property
    def r(self) -> int:
        return self.observed_idx.size


class _DiffuseSolver:
    """Solves (Sigma_00 + Gamma_00 + delta_inv * X0 X0') z = b without ever
    forming the rank-one term, via Sherman-Morrison on the Cholesky factor
    of the proper part.

    Falls back to factoring the assembled matrix when the proper part
    alone is singular (the rank-one term can be what makes it definite).
    """

    def __init__(self, Sigma00: np.ndarray, gamma00: np.ndarray,
                 X0: np.ndarray, delta_inv: float):
        self.X0 = X0
        self.delta_inv = delta_inv
        A = Sigma00 + np.diag(gamma00)
        self._direct = None
        try:
            self._factor = cho_factor(0.5 * (A + A.T), lower=True)
        except LinAlgError:
            M = A + delta_inv * np.outer(X0, X0)
            try:
                self._direct = cho_factor(0.5 * (M + M.T), lower=True)
            except LinAlgError:
                evals = np.linalg.eigvalsh(0.5 * (M + M.T))
                raise NotPositiveDefiniteError(
                    "observed-block covariance plus noise is not positive definite "
                    f"(smallest eigenvalue {evals[0]:.6e})",
                    min_eigenvalue=float(evals[0]),
                ) from None
        if self._direct is None and delta_inv > 0:
            self._g = cho_solve(self._factor, X0)
            self._q = float(X0 @ self._g)

    def solve(self, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return (z, alpha) with z the solution and alpha the coefficient
        delta_inv * (X0 . z) evaluated in cancellation-free form."""
        if self._direct is not None:
            z = cho_solve(self._direct, b)
            alpha = self.delta_inv * (self.X0 @ z)
            return z, alpha
        u = cho_solve(self._factor, b)
        if self.delta_inv == 0:
            zero = np.zeros(b.shape[1]) if b.ndim == 2 else 0.0
            return u, zero
        alpha = (self.X0 @ u) / (1.0 / self.delta_inv + self._q)
        z = u - (np.outer(self._g, alpha) if b.ndim == 2 else alpha * self._g)
        return z, alpha


def predict_partial(m: KrigingModel, d: PartitionedData) -> np.ndarray:
    """Predict the signal at every node from the observed subset.

    Indices may come in any order; the computation permutes internally.
    """
    idx = d.observed_idx
    if idx.max() >= m.n:
        raise ValueError("observed index out of range for the model")
    X0 = m.X[idx]
    solver = _DiffuseSolver(m.Sigma[np.ix_(idx, idx)], m.gamma[idx], X0, m.delta_inv)
    z, alpha = solver.solve(d.y_obs - m.mu * X0)
    return alpha * m.X + m.Sigma[:, idx] @ z + m.mu * m.X


def predict_full(m: KrigingModel, y: np.ndarray) -> np.ndarray:
    """Predict the signal when every node carries an observation."""
    y = np.asarray(y, dtype=float)
    if y.shape != (m.n,):
        raise ValueError(f"y must have length {m.n}")
    return predict_partial(m, PartitionedData(np.arange(m.n), y))


def predict_variance(m: KrigingModel, d: PartitionedData) -> np.ndarray:
    """Covariance of the prediction errors given the observed subset."""
    idx = d.observed_idx
    if idx.max() >= m.n:
        raise ValueError("observed index out of range for the model")
    X0 = m.X[idx]
    solver = _DiffuseSolver(m.Sigma[np.ix_(idx, idx)], m.gamma[idx], X0, m.delta_inv)
    psi = m.psi()
    z, alpha = solver.solve(psi[idx, :])
    # Psi_.0 @ z with the rank-one part of Psi_.0 expanded around alpha
    cross = np.outer(m.X, alpha) + m.Sigma[:, idx] @ z
    out = psi - cross
    return 0.5 * (out + out.T)
