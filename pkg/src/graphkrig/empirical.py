"""Data-driven signal covariance: estimate a stationary correlation
function of graph similarity from the observed responses, repair it to
positive semi-definite, and predict with the resulting model.

The signal model is Z ~ N(mu * X, sigma2 * V R V) with known relative
standard deviations v and a correlation matrix R_ij = rho(s_ij) that is
the same wherever the similarity is the same. The pipeline:

1. turn pairwise squared differences of observed residuals into naive
   per-pair correlation estimates,
2. smooth them against similarity (cubic spline on log(s + 1), or group
   means when the similarities take few distinct values),
3. evaluate the smooth on every node pair, force unit diagonal,
4. rescale by sigma2 * V . V and project onto the PSD cone (optionally
   at reduced rank),
5. predict by kriging with noise variance lambda_inv at every node.

sigma2 and lambda_inv are chosen by seeded k-fold cross-validation over
a grid.
"""
import warnings
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np
from scipy.interpolate import LSQUnivariateSpline

from . import graphs
from .graphs import SimilarityGraph, WeightedDigraph
from .kriging import KrigingModel, PartitionedData, predict_partial
from .linalg import psd_project

RANDOM_WALK_STYLE = "random-walk-style"
TIKHONOV_STYLE = "tikhonov-style"

SPLINE_BACKEND = "spline"
GROUP_AVERAGE_BACKEND = "group-average"
AUTO_BACKEND = "auto"

SPLINE_KNOTS = 10
MIN_DISTINCT_FOR_SPLINE = 12
GROUP_AVERAGE_MAX_DISTINCT = 20
MAX_SMOOTHING_PAIRS = 1_000_000


@dataclass(frozen=True, eq=False)
class EmpiricalConfig:
    """Prespecified model pieces plus the two tuning parameters.

    ``v`` and ``X`` are the relative standard deviations and the mean
    direction; ``similarity`` holds the pairwise similarities the
    correlation is stationary in. ``rank`` selects the reduced-rank PSD
    repair when set.
    """

    sigma2: float
    lambda_inv: float
    v: np.ndarray
    X: np.ndarray
    similarity: SimilarityGraph
    similarity_source: str = RANDOM_WALK_STYLE
    smoother_backend: str = AUTO_BACKEND
    rank: int | None = None

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        if self.lambda_inv <= 0:
            raise ValueError("lambda_inv must be positive")
        v = np.asarray(self.v, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if np.any(v <= 0):
            raise ValueError("relative standard deviations must be positive")
        n = self.similarity.s.shape[0]
        if v.shape != (n,) or X.shape != (n,):
            raise ValueError("v and X must have one entry per node")
        if self.smoother_backend not in (AUTO_BACKEND, SPLINE_BACKEND, GROUP_AVERAGE_BACKEND):
            raise ValueError(f"unknown smoother backend {self.smoother_backend!r}")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return self.v.shape[0]


def random_walk_config(
    g: WeightedDigraph, sigma2: float, lambda_inv: float,
    teleport: float = 0.0, rank: int | None = None,
    smoother_backend: str = AUTO_BACKEND,
) -> EmpiricalConfig:
    """Preset with v = X = sqrt(pi) and the random-walk similarity."""
    wq = graphs.walk_quantities(g, teleport)
    root = np.sqrt(wq.pi)
    return EmpiricalConfig(sigma2=sigma2, lambda_inv=lambda_inv, v=root, X=root,
                           similarity=graphs.similarity_matrix(wq),
                           similarity_source=RANDOM_WALK_STYLE,
                           smoother_backend=smoother_backend, rank=rank)


def tikhonov_config(
    g: WeightedDigraph, sigma2: float, lambda_inv: float,
    rank: int | None = None, smoother_backend: str = AUTO_BACKEND,
) -> EmpiricalConfig:
    """Preset with v = X = 1 and edge weights (symmetrized) as similarity."""
    und = graphs.as_undirected(g)
    ones = np.ones(g.n)
    return EmpiricalConfig(sigma2=sigma2, lambda_inv=lambda_inv, v=ones, X=ones,
                           similarity=graphs.weight_laplacian(und),
                           similarity_source=TIKHONOV_STYLE,
                           smoother_backend=smoother_backend, rank=rank)


def estimate_mean(d: PartitionedData, X: np.ndarray, binary: bool = False) -> float:
    """Mean scale: average of y_i / X_i over observed nodes, or zero for
    plus/minus-one labels."""
    if binary:
        return 0.0
    X0 = np.asarray(X, dtype=float)[d.observed_idx]
    if np.any(X0 == 0):
        bad = int(d.observed_idx[np.flatnonzero(X0 == 0)[0]])
        raise ValueError(f"mean direction is zero at observed node {bad}")
    return float(np.mean(d.y_obs / X0))


def naive_correlations(
    d: PartitionedData, config: EmpiricalConfig, mu: float,
) -> np.ndarray:
    """Per-pair naive correlation estimates over all observed pairs i < j.

    Returns an array of rows (s_ij, r_hat_ij). Half the squared residual
    difference estimates the pairwise variation; inverting the model
    relation gives the raw correlation, which may legitimately fall
    outside [-1, 1].
    """
    if d.r < 2:
        raise ValueError("need at least two observed nodes to form pairs")
    idx = d.observed_idx
    resid = d.y_obs - mu * config.X[idx]
    v0 = config.v[idx]
    iu, ju = np.triu_indices(d.r, k=1)
    phi_hat = 0.5 * (resid[iu] - resid[ju]) ** 2
    r_hat = (config.sigma2 * (v0[iu] ** 2 + v0[ju] ** 2) / 2.0
             + config.lambda_inv - phi_hat) / (config.sigma2 * v0[iu] * v0[ju])
    s_vals = config.similarity.s[idx[iu], idx[ju]]
    return np.column_stack([s_vals, r_hat])


def _transform(s: np.ndarray) -> np.ndarray:
    """Similarity scale used for spline smoothing."""
    return np.log1p(s)


@dataclass(frozen=True, eq=False)
class CorrelationFit:
    """Fitted correlation-vs-similarity function.

    ``backend_used`` records whether a spline or per-value group means
    produced the fit; evaluation clamps queries into the training range.
    """

    training_pairs: np.ndarray
    backend_used: str
    transform: str
    _group_s: np.ndarray | None = None
    _group_mean: np.ndarray | None = None
    _spline: object | None = None
    _t_range: tuple[float, float] | None = None

    def rho(self, s: np.ndarray | float) -> np.ndarray:
        """Evaluate the fitted correlation at similarity value(s)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if self.backend_used == GROUP_AVERAGE_BACKEND:
            if len(self._group_s) == 1:
                return np.full(s.shape, self._group_mean[0])
            # piecewise constant: nearest group value, ties toward smaller s
            pos = np.clip(np.searchsorted(self._group_s, s), 1, len(self._group_s) - 1)
            left = self._group_s[pos - 1]
            right = self._group_s[pos]
            take_right = np.abs(s - right) < np.abs(s - left)
            return self._group_mean[pos - 1 + take_right.astype(int)]
        t = np.clip(_transform(s), self._t_range[0], self._t_range[1])
        return np.asarray(self._spline(t), dtype=float)


def _group_average_fit(pairs: np.ndarray) -> CorrelationFit:
    s, r = pairs[:, 0], pairs[:, 1]
    uniq, inverse = np.unique(s, return_inverse=True)
    sums = np.bincount(inverse, weights=r, minlength=len(uniq))
    counts = np.bincount(inverse, minlength=len(uniq))
    return CorrelationFit(training_pairs=pairs, backend_used=GROUP_AVERAGE_BACKEND,
                          transform="identity", _group_s=uniq,
                          _group_mean=sums / counts)


def _spline_fit(pairs: np.ndarray, knots: int) -> CorrelationFit:
    t_all = _transform(pairs[:, 0])
    # aggregate duplicate abscissas; sqrt(count) weights keep the fit equal
    # to least squares on the raw pairs
    uniq, inverse = np.unique(t_all, return_inverse=True)
    sums = np.bincount(inverse, weights=pairs[:, 1], minlength=len(uniq))
    counts = np.bincount(inverse, minlength=len(uniq))
    means = sums / counts
    probs = (np.arange(knots) + 1.0) / (knots + 1.0)
    interior = np.quantile(t_all, probs)
    interior = np.unique(interior[(interior > uniq[0]) & (interior < uniq[-1])])
    spline = LSQUnivariateSpline(uniq, means, interior, w=np.sqrt(counts), k=3, ext=3)
    return CorrelationFit(training_pairs=pairs, backend_used=SPLINE_BACKEND,
                          transform="log1p", _spline=spline,
                          _t_range=(float(uniq[0]), float(uniq[-1])))


def fit_correlation(
    pairs: np.ndarray, backend: str = AUTO_BACKEND, knots: int = SPLINE_KNOTS,
    max_pairs: int = MAX_SMOOTHING_PAIRS, seed: int = 0,
) -> CorrelationFit:
    """Smooth naive (similarity, correlation) pairs into a function.

    ``auto`` picks group averages when the similarities take at most 20
    distinct values and a cubic spline otherwise. The spline needs at
    least 12 distinct transformed similarities and falls back to group
    averages (with a warning) below that. Above ``max_pairs`` pairs a
    seeded uniform subsample is smoothed instead.
    """
    pairs = np.asarray(pairs, dtype=float)
    if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] == 0:
        raise ValueError("expected a nonempty array of (similarity, correlation) rows")
    if pairs.shape[0] > max_pairs:
        rng = np.random.default_rng(seed)
        keep = rng.choice(pairs.shape[0], size=max_pairs, replace=False)
        pairs = pairs[np.sort(keep)]
    n_distinct = len(np.unique(pairs[:, 0]))
    if backend == AUTO_BACKEND:
        backend = GROUP_AVERAGE_BACKEND if n_distinct <= GROUP_AVERAGE_MAX_DISTINCT \
            else SPLINE_BACKEND
    if backend == SPLINE_BACKEND and n_distinct < MIN_DISTINCT_FOR_SPLINE:
        warnings.warn(
            f"only {n_distinct} distinct similarities; falling back to group averages",
            stacklevel=2,
        )
        backend = GROUP_AVERAGE_BACKEND
    if backend == GROUP_AVERAGE_BACKEND:
        return _group_average_fit(pairs)
    try:
        return _spline_fit(pairs, knots)
    except ValueError as exc:
        warnings.warn(f"spline fit failed ({exc}); falling back to group averages",
                      stacklevel=2)
        return _group_average_fit(pairs)


def build_covariance(
    fit: CorrelationFit, config: EmpiricalConfig,
    similarity: SimilarityGraph | None = None,
) -> np.ndarray:
    """Signal covariance sigma2 * V R V with R from the fitted correlation,
    unit diagonal forced, then projected onto the PSD cone (at
    ``config.rank`` when set)."""
    simg = config.similarity if similarity is None else similarity
    s = simg.s
    r_tilde = fit.rho(s.ravel()).reshape(s.shape)
    r_tilde = 0.5 * (r_tilde + r_tilde.T)
    np.fill_diagonal(r_tilde, 1.0)
    psi = config.sigma2 * (config.v[:, None] * r_tilde * config.v[None, :])
    return psd_project(psi, rank=config.rank)


def predict_empirical(
    d: PartitionedData, config: EmpiricalConfig, mu: float, psi_hat: np.ndarray,
) -> np.ndarray:
    """Kriging prediction under the empirical covariance with noise
    variance lambda_inv at every node."""
    model = KrigingModel(X=config.X, mu=mu, Sigma=psi_hat,
                         gamma=np.full(config.n, config.lambda_inv), delta_inv=0.0)
    return predict_partial(model, d)


def fit_and_predict(
    d: PartitionedData, config: EmpiricalConfig, binary: bool = False,
) -> np.ndarray:
    """Full pipeline: mean, naive correlations, smoothing, PSD repair,
    prediction."""
    mu = estimate_mean(d, config.X, binary=binary)
    pairs = naive_correlations(d, config, mu)
    fit = fit_correlation(pairs, backend=config.smoother_backend)
    psi_hat = build_covariance(fit, config)
    return predict_empirical(d, config, mu, psi_hat)


def _fold_assignments(d: PartitionedData, folds: int, seed: int,
                      binary: bool) -> np.ndarray:
    """Fold label for each observed position; stratified by sign for
    binary labels."""
    rng = np.random.default_rng(seed)
    assignment = np.empty(d.r, dtype=int)
    if binary:
        groups = [np.flatnonzero(d.y_obs > 0), np.flatnonzero(d.y_obs <= 0)]
    else:
        groups = [np.arange(d.r)]
    offset = 0
    for members in groups:
        members = rng.permutation(members)
        assignment[members] = (np.arange(members.size) + offset) % folds
        offset += members.size
    return assignment


def _score(pred: np.ndarray, truth: np.ndarray, binary: bool) -> float:
    if not binary:
        return float(np.mean((pred - truth) ** 2))
    pos = truth > 0
    if pos.all() or not pos.any():
        return float("nan")
    # pair-counting estimator with half weight for ties
    from .evaluation import auc
    return 1.0 - auc(pred, truth, np.arange(truth.size))


@dataclass(frozen=True)
class CVResult:
    """Grid-search outcome: the selected point and per-point mean scores."""

    sigma2: float
    lambda_inv: float
    table: tuple[tuple[float, float, float], ...]


def cross_validate(
    d: PartitionedData, config: EmpiricalConfig,
    config_grid: Iterable[tuple[float, float]], folds: int = 10,
    seed: int = 0, binary: bool = False,
) -> CVResult:
    """Pick (sigma2, lambda_inv) by k-fold cross-validation on the
    observed nodes, refitting the full pipeline on the held-in folds each
    time. Ties break toward smaller sigma2, then smaller lambda_inv.
    """
    grid = sorted(set((float(s2), float(li)) for s2, li in config_grid))
    if not grid:
        raise ValueError("the cross-validation grid is empty")
    if not (2 <= folds <= d.r):
        raise ValueError(f"folds must be in [2, {d.r}], got {folds}")
    assignment = _fold_assignments(d, folds, seed, binary)
    table = []
    for sigma2, lambda_inv in grid:
        cfg = replace(config, sigma2=sigma2, lambda_inv=lambda_inv)
        fold_scores = []
        for k in range(folds):
            held_out = assignment == k
            if held_out.all() or not held_out.any():
                continue
            train = PartitionedData(d.observed_idx[~held_out], d.y_obs[~held_out])
            try:
                pred = fit_and_predict(train, cfg, binary=binary)
            except Exception:
                fold_scores.append(float("nan"))
                continue
            out_idx = d.observed_idx[held_out]
            fold_scores.append(_score(pred[out_idx], d.y_obs[held_out], binary))
        valid = [s for s in fold_scores if np.isfinite(s)]
        table.append((sigma2, lambda_inv,
                      float(np.mean(valid)) if valid else float("nan")))
    best = None
    for sigma2, lambda_inv, score in table:
        key = score if np.isfinite(score) else float("inf")
        if best is None or key < best[0]:
            best = (key, sigma2, lambda_inv)
    return CVResult(sigma2=best[1], lambda_inv=best[2], table=tuple(table))


def grid_scales(y_obs: np.ndarray, v: np.ndarray) -> tuple[float, float]:
    """Natural units for the (sigma2, lambda_inv) grid.

    The marginal response variance is roughly sigma2 * mean(v^2) +
    lambda_inv, so sigma2 factors scale by var(y) / mean(v^2) (which is
    var(y) itself when v = 1) and lambda_inv factors by var(y).
    """
    base = float(np.var(y_obs))
    if base <= 0:
        base = 1.0
    return base / float(np.mean(np.square(v))), base


def default_grid(y_obs: np.ndarray, v: np.ndarray) -> list[tuple[float, float]]:
    """Factors {0.1, 0.5, 1, 2, 5, 10} for sigma2 and {1e-3, ..., 1} for
    lambda_inv applied to the natural scales of ``grid_scales``."""
    s2_scale, li_scale = grid_scales(y_obs, v)
    return [(f1 * s2_scale, f2 * li_scale)
            for f1 in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
            for f2 in (1e-3, 1e-2, 1e-1, 1.0)]


def correlation_curve(fit: CorrelationFit, s_values: np.ndarray) -> np.ndarray:
    """Rows (s, transformed s, rho(s)) for export and plotting."""
    s_values = np.unique(np.asarray(s_values, dtype=float))
    return np.column_stack([s_values, _transform(s_values), fit.rho(s_values)])
