"""The quadratic-criterion family of graph smoothers and, for each method,
the Gaussian model whose kriging predictor reproduces it.

Each method minimizes Q(Z) = Z' L Z + (Z - Y*)' Lambda (Z - Y*) for a PSD
smoothing matrix L and a nonnegative diagonal Lambda, where Y* carries the
observed values and a mean guess elsewhere. ``assemble`` builds
(L, Lambda, Y*), ``quadratic_smooth`` solves the criterion, and
``kriging_equivalent`` returns the matching :class:`KrigingModel`.

Methods whose Lambda is zero on unobserved nodes correspond to kriging
with infinite noise there; that limit is realized exactly by predicting
from the observed block only (``predict_partial``). Diffuse-prior limits
are realized numerically at delta_inv = 1e12.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from . import graphs, linalg
from .errors import NotPositiveDefiniteError
from .graphs import WeightedDigraph
from .kriging import DELTA_INV_LIMIT, KrigingModel, PartitionedData

RANDOM_WALK = "random-walk"
TIKHONOV = "tikhonov"
TIKHONOV_INTERPOLATED = "tikhonov-interpolated"
ZHOU_2004 = "zhou2004"
HUB_AUTHORITY = "hub-authority"
MANIFOLD_LINEAR = "manifold-linear"
SPECTRAL_TRANSFORM = "spectral-transform"

METHODS = (RANDOM_WALK, TIKHONOV, TIKHONOV_INTERPOLATED, ZHOU_2004,
           HUB_AUTHORITY, MANIFOLD_LINEAR, SPECTRAL_TRANSFORM)

# methods whose fit weight applies to every node (Lambda = lam * I)
FULL_WEIGHT_METHODS = (RANDOM_WALK, ZHOU_2004, HUB_AUTHORITY)

# large-lambda0 stand-in for the interpolating variant
LAMBDA0_LIMIT = 1e12
# threshold for dispatching on K @ 1 = 0 and f(0) = 0
NULLSPACE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class SmootherSpec:
    """Method tag plus the parameters the method needs.

    ``lam`` is the fit weight for random-walk / zhou2004 / hub-authority;
    ``lambda0`` the observed-value weight for the Tikhonov-style methods;
    ``gamma`` is the hub-vs-authority weight in [0, 1] or the Laplacian
    multiplier of the manifold method; ``K`` the linear-kernel Gram matrix;
    ``f`` a nonnegative increasing spectral transform (default
    exp(alpha^2 x / 2) when ``alpha`` is given); ``mu_guess`` fills
    unobserved entries of Y* along the method's mean direction.
    """

    method: str
    lam: float = 1.0
    lambda0: float = 1.0
    gamma: float = 0.5
    K: np.ndarray | None = None
    f: Callable[[float], float] | None = None
    alpha: float | None = None
    mu_guess: float = 0.0
    teleport: float = 0.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.method in FULL_WEIGHT_METHODS and self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.method in (TIKHONOV, MANIFOLD_LINEAR, SPECTRAL_TRANSFORM) and self.lambda0 <= 0:
            raise ValueError("lambda0 must be positive")
        if self.method == HUB_AUTHORITY and not (0.0 <= self.gamma <= 1.0):
            raise ValueError(f"hub-authority gamma must be in [0, 1], got {self.gamma}")
        if self.method == MANIFOLD_LINEAR:
            if self.gamma <= 0:
                raise ValueError("manifold gamma must be positive")
            if self.K is None:
                raise ValueError("manifold-linear requires the kernel matrix K")
        if self.method == SPECTRAL_TRANSFORM and self.f is None and self.alpha is None:
            raise ValueError("spectral-transform requires f or alpha")

    def transform(self) -> Callable[[np.ndarray], np.ndarray]:
        if self.f is not None:
            return self.f
        a2 = self.alpha ** 2
        return lambda x: np.exp(a2 * x / 2.0)


@dataclass(frozen=True, eq=False)
class _Parts:
    """Smoothing matrix, per-node fit weight, and mean direction."""

    L: np.ndarray
    lam_full: np.ndarray
    X: np.ndarray


def _whitened_laplacian(lap: np.ndarray, pi: np.ndarray, what: str) -> np.ndarray:
    if np.any(pi <= 0):
        bad = int(np.flatnonzero(pi <= 0)[0])
        raise ValueError(f"node {bad} has zero stationary mass in the {what} walk; "
                         "the scaled Laplacian is undefined")
    root = np.sqrt(pi)
    return lap / np.outer(root, root)


def _spectral_values(spec: SmootherSpec, lap: np.ndarray) -> tuple[linalg.SymEig, np.ndarray]:
    eig = linalg.sym_eig(lap)
    f = spec.transform()
    fd = np.array([float(f(x)) for x in eig.d])
    if np.any(fd < -NULLSPACE_TOL):
        raise ValueError("spectral transform must be nonnegative")
    return eig, np.maximum(fd, 0.0)


def _parts(spec: SmootherSpec, g: WeightedDigraph) -> _Parts:
    n = g.n
    if spec.method == RANDOM_WALK:
        if spec.teleport == 0.0 and not graphs.is_strongly_connected(g):
            raise ValueError("random walk is reducible; set teleport > 0")
        wq = graphs.walk_quantities(g, spec.teleport)
        simg = graphs.similarity_matrix(wq)
        return _Parts(L=_whitened_laplacian(simg.laplacian, wq.pi, "random"),
                      lam_full=np.full(n, spec.lam), X=np.sqrt(wq.pi))
    if spec.method == ZHOU_2004:
        und = graphs.as_undirected(g)
        deg = und.out_degrees()
        if np.any(deg <= 0):
            raise ValueError("zhou2004 requires every node to have positive degree")
        lap = graphs.weight_laplacian(und).laplacian
        root = np.sqrt(deg)
        return _Parts(L=lap / np.outer(root, root), lam_full=np.full(n, spec.lam), X=root)
    if spec.method in (TIKHONOV, TIKHONOV_INTERPOLATED):
        lap = graphs.weight_laplacian(graphs.as_undirected(g)).laplacian
        lam0 = LAMBDA0_LIMIT if spec.method == TIKHONOV_INTERPOLATED else spec.lambda0
        return _Parts(L=lap, lam_full=np.full(n, lam0), X=np.ones(n))
    if spec.method == HUB_AUTHORITY:
        haq = graphs.hub_authority(g)
        L = np.zeros((n, n))
        if spec.gamma > 0:
            L = L + spec.gamma * _whitened_laplacian(haq.lap_H, haq.pi_H, "hub")
        if spec.gamma < 1:
            L = L + (1.0 - spec.gamma) * _whitened_laplacian(haq.lap_A, haq.pi_A, "authority")
        return _Parts(L=L, lam_full=np.full(n, spec.lam), X=np.zeros(n))
    if spec.method == MANIFOLD_LINEAR:
        K = np.asarray(spec.K, dtype=float)
        if K.shape != (n, n):
            raise ValueError(f"kernel matrix must be {n}x{n}")
        K = 0.5 * (K + K.T)
        eig_min = float(np.linalg.eigvalsh(K)[0])
        if eig_min < -NULLSPACE_TOL:
            raise ValueError(f"kernel matrix must be PSD (smallest eigenvalue {eig_min:.3e})")
        lap = graphs.weight_laplacian(graphs.as_undirected(g)).laplacian
        k_null = float(np.max(np.abs(K @ np.ones(n))))
        X = np.ones(n) if k_null <= NULLSPACE_TOL else np.zeros(n)
        return _Parts(L=K + spec.gamma * lap, lam_full=np.full(n, spec.lambda0), X=X)
    # spectral transform
    lap = graphs.weight_laplacian(graphs.as_undirected(g)).laplacian
    eig, fd = _spectral_values(spec, lap)
    L = (eig.U.T * fd) @ eig.U
    X = np.ones(n) if float(fd[-1]) <= NULLSPACE_TOL else np.zeros(n)
    return _Parts(L=0.5 * (L + L.T), lam_full=np.full(n, spec.lambda0), X=X)


def mean_direction(spec: SmootherSpec, g: WeightedDigraph) -> np.ndarray:
    """The direction X along which the method leaves the mean unpenalized
    (all zeros for the proper-prior methods)."""
    return _parts(spec, g).X


def assemble(
    spec: SmootherSpec, g: WeightedDigraph, d: PartitionedData,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Build (L, Lambda diagonal, Y*) for the method on this graph.

    Y* carries the observed values and mu_guess * X elsewhere. For the
    Tikhonov-style methods Lambda is zero off the observed set.
    """
    idx = d.observed_idx
    if idx.max() >= g.n:
        raise ValueError("observed index out of range for the graph")
    parts = _parts(spec, g)
    y_star = spec.mu_guess * parts.X
    y_star[idx] = d.y_obs
    if spec.method in FULL_WEIGHT_METHODS:
        lam_diag = parts.lam_full
    else:
        lam_diag = np.zeros(g.n)
        lam_diag[idx] = parts.lam_full[idx]
    return parts.L, lam_diag, y_star


def quadratic_smooth(L: np.ndarray, lam_diag: np.ndarray, y_star: np.ndarray) -> np.ndarray:
    """Minimize Z' L Z + (Z - Y*)' diag(lam) (Z - Y*)."""
    M = L + np.diag(lam_diag)
    try:
        factor = cho_factor(0.5 * (M + M.T), lower=True)
    except LinAlgError:
        evals = np.linalg.eigvalsh(0.5 * (M + M.T))
        raise NotPositiveDefiniteError(
            f"L + Lambda is singular (smallest eigenvalue {evals[0]:.6e}); "
            "the criterion has no unique minimizer",
            min_eigenvalue=float(evals[0]),
        ) from None
    return cho_solve(factor, lam_diag * y_star)


def smooth(spec: SmootherSpec, g: WeightedDigraph, d: PartitionedData) -> np.ndarray:
    """Assemble and solve in one step."""
    return quadratic_smooth(*assemble(spec, g, d))


def interpolated_smooth(g: WeightedDigraph, d: PartitionedData) -> np.ndarray:
    """Exact interpolating variant: keep observed values fixed and extend
    harmonically, solving the unobserved block of the Laplacian directly.

    Better conditioned than driving lambda0 to a large value; the two
    agree to roughly the inverse of that value.
    """
    lap = graphs.weight_laplacian(graphs.as_undirected(g)).laplacian
    idx = d.observed_idx
    rest = np.setdiff1d(np.arange(g.n), idx)
    z = np.zeros(g.n)
    z[idx] = d.y_obs
    if rest.size:
        z[rest] = -linalg.spd_solve(lap[np.ix_(rest, rest)],
                                    lap[np.ix_(rest, idx)] @ d.y_obs)
    return z


def _inverse_spd(L: np.ndarray, what: str) -> np.ndarray:
    try:
        factor = cho_factor(0.5 * (L + L.T), lower=True)
    except LinAlgError:
        evals = np.linalg.eigvalsh(0.5 * (L + L.T))
        raise NotPositiveDefiniteError(
            f"{what} smoothing matrix is singular (smallest eigenvalue {evals[0]:.6e}); "
            "no proper-prior model exists for this graph",
            min_eigenvalue=float(evals[0]),
        ) from None
    out = cho_solve(factor, np.eye(L.shape[0]))
    return 0.5 * (out + out.T)


def kriging_equivalent(spec: SmootherSpec, g: WeightedDigraph) -> KrigingModel:
    """The Gaussian model whose kriging predictor reproduces the smoother.

    For random-walk / zhou2004 / hub-authority, apply ``predict_full`` to
    Y*; for the Tikhonov-style methods apply ``predict_partial`` to the
    observed values (their unobserved-node noise is infinite in the
    limit, which predicting from the observed block realizes exactly).
    """
    n = g.n
    if spec.method == RANDOM_WALK:
        wq = graphs.walk_quantities(g, spec.teleport)
        simg = graphs.similarity_matrix(wq)
        root = np.sqrt(wq.pi)
        sigma = (root[:, None] * linalg.pseudo_inverse(simg.laplacian)) * root[None, :]
        return KrigingModel(X=root, mu=spec.mu_guess, Sigma=sigma,
                            gamma=np.full(n, 1.0 / spec.lam), delta_inv=DELTA_INV_LIMIT)
    if spec.method == ZHOU_2004:
        und = graphs.as_undirected(g)
        lap = graphs.weight_laplacian(und).laplacian
        root = np.sqrt(und.out_degrees())
        sigma = (root[:, None] * linalg.pseudo_inverse(lap)) * root[None, :]
        return KrigingModel(X=root, mu=spec.mu_guess, Sigma=sigma,
                            gamma=np.full(n, 1.0 / spec.lam), delta_inv=DELTA_INV_LIMIT)
    if spec.method in (TIKHONOV, TIKHONOV_INTERPOLATED):
        lap = graphs.weight_laplacian(graphs.as_undirected(g)).laplacian
        lam0 = LAMBDA0_LIMIT if spec.method == TIKHONOV_INTERPOLATED else spec.lambda0
        return KrigingModel(X=np.ones(n), mu=spec.mu_guess,
                            Sigma=linalg.pseudo_inverse(lap),
                            gamma=np.full(n, 1.0 / lam0), delta_inv=DELTA_INV_LIMIT)
    if spec.method == HUB_AUTHORITY:
        parts = _parts(spec, g)
        return KrigingModel(X=np.zeros(n), mu=spec.mu_guess,
                            Sigma=_inverse_spd(parts.L, "hub-authority"),
                            gamma=np.full(n, 1.0 / spec.lam), delta_inv=0.0)
    if spec.method == MANIFOLD_LINEAR:
        parts = _parts(spec, g)
        if parts.X.any():  # K 1 = 0: improper prior along the constant vector
            return KrigingModel(X=np.ones(n), mu=spec.mu_guess,
                                Sigma=linalg.pseudo_inverse(parts.L),
                                gamma=np.full(n, 1.0 / spec.lambda0),
                                delta_inv=DELTA_INV_LIMIT)
        return KrigingModel(X=np.zeros(n), mu=spec.mu_guess,
                            Sigma=_inverse_spd(parts.L, "manifold"),
                            gamma=np.full(n, 1.0 / spec.lambda0), delta_inv=0.0)
    # spectral transform
    lap = graphs.weight_laplacian(graphs.as_undirected(g)).laplacian
    eig, fd = _spectral_values(spec, lap)
    if float(fd[-1]) <= NULLSPACE_TOL:
        keep = fd > NULLSPACE_TOL
        sigma = (eig.U[keep].T / fd[keep]) @ eig.U[keep]
        return KrigingModel(X=np.ones(n), mu=spec.mu_guess,
                            Sigma=0.5 * (sigma + sigma.T),
                            gamma=np.full(n, 1.0 / spec.lambda0),
                            delta_inv=DELTA_INV_LIMIT)
    sigma = (eig.U.T / fd) @ eig.U
    return KrigingModel(X=np.zeros(n), mu=spec.mu_guess,
                        Sigma=0.5 * (sigma + sigma.T),
                        gamma=np.full(n, 1.0 / spec.lambda0), delta_inv=0.0)
