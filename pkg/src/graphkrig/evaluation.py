"""Holdout experiment harness: seeded splits, MSE and AUC metrics,
baselines, and the trial loop that compares methods at a range of
holdout fractions.

Per trial ``t`` everything is seeded from ``base_seed + t``, so any two
methods see identical splits and individual trials can be reproduced in
isolation. Failed trials (for example a single-class holdout under the
AUC metric) are recorded and excluded from the aggregates.
"""
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import rankdata

from . import empirical, smoothers
from .data import BINARY, LabeledGraphData
from .kriging import PartitionedData

MSE = "mse"
ONE_MINUS_AUC = "one-minus-auc"

REGRESS_ON_X = "regress-on-x"
RANDOM_GUESS = "random-guess"

DEFAULT_LAMBDA_GRID = (1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0)


def holdout_split(d: PartitionedData, fraction: float, seed: int,
                  ) -> tuple[PartitionedData, np.ndarray]:
    """Split the observed nodes into held-in data and a held-out index set.

    The held-out count is the fraction rounded to the nearest integer;
    the graph itself is untouched.
    """
    if not (0.0 < fraction < 1.0):
        raise ValueError(f"holdout fraction must be in (0, 1), got {fraction}")
    n_out = int(round(fraction * d.r))
    if d.r - n_out < 2:
        raise ValueError(
            f"holding out {n_out} of {d.r} labels leaves fewer than 2 held-in nodes"
        )
    rng = np.random.default_rng(seed)
    order = rng.permutation(d.r)
    out_pos, in_pos = order[:n_out], order[n_out:]
    held_in = PartitionedData(d.observed_idx[in_pos], d.y_obs[in_pos])
    return held_in, np.sort(d.observed_idx[out_pos])


def mse(pred: np.ndarray, truth: np.ndarray, idx: np.ndarray) -> float:
    """Mean squared error over the given node indices."""
    idx = np.asarray(idx, dtype=int)
    if idx.size == 0:
        raise ValueError("cannot score an empty index set")
    diff = np.asarray(pred)[idx] - np.asarray(truth)[idx]
    return float(np.mean(diff ** 2))


def auc(scores: np.ndarray, binary_labels: np.ndarray, idx: np.ndarray) -> float:
    """Area under the ROC curve by pair counting, ties at half weight.

    Equals the probability that a positive label outscores a negative
    one. Raises when ``idx`` holds a single class.
    """
    idx = np.asarray(idx, dtype=int)
    s = np.asarray(scores, dtype=float)[idx]
    labels = np.asarray(binary_labels)[idx]
    pos = labels > 0
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one positive and one negative label")
    ranks = rankdata(s, method="average")
    u = float(ranks[pos].sum()) - n_pos * (n_pos + 1) / 2.0
    return u / (n_pos * n_neg)


def baseline_predict(d: PartitionedData, X: np.ndarray, binary: bool,
                     seed: int = 0) -> np.ndarray:
    """Baseline scores: the no-covariance regression mu_hat * X for
    continuous responses, seeded uniform noise for binary ones."""
    X = np.asarray(X, dtype=float)
    if binary:
        rng = np.random.default_rng(seed)
        return rng.uniform(size=X.shape[0])
    mu = empirical.estimate_mean(d, X, binary=False)
    return mu * X


@dataclass(frozen=True)
class FixedMethodSpec:
    """A fixed-correlation smoother scored at its best tuning parameter
    over ``lambda_grid`` evaluated on the holdout."""

    name: str
    method: str
    gamma: float = 0.5
    teleport: float = 0.0
    lambda_grid: tuple[float, ...] = DEFAULT_LAMBDA_GRID


@dataclass(frozen=True)
class EmpiricalMethodSpec:
    """Empirical-correlation kriging; sigma2 and lambda_inv come from
    cross-validation inside each trial's held-in set."""

    name: str
    style: str = empirical.RANDOM_WALK_STYLE
    rank: int | None = None
    backend: str = empirical.AUTO_BACKEND
    teleport: float = 0.0
    cv_folds: int = 10
    sigma2_factors: tuple[float, ...] = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)
    lambda_inv_factors: tuple[float, ...] = (1e-3, 1e-2, 1e-1, 1.0)


@dataclass(frozen=True)
class BaselineMethodSpec:
    """Reference predictor: regression on X or random ordering."""

    name: str
    kind: str = REGRESS_ON_X
    style: str = empirical.RANDOM_WALK_STYLE
    teleport: float = 0.0


MethodSpec = FixedMethodSpec | EmpiricalMethodSpec | BaselineMethodSpec


@dataclass(frozen=True)
class ExperimentConfig:
    """Methods, holdout fractions, trial count, seed, and metric."""

    methods: tuple[MethodSpec, ...]
    fractions: tuple[float, ...] = (0.5,)
    trials: int = 50
    seed: int = 0
    metric: str = MSE
    baseline: str | None = None
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if any(not (0.0 < f < 1.0) for f in self.fractions):
            raise ValueError("holdout fractions must be in (0, 1)")
        if self.metric not in (MSE, ONE_MINUS_AUC):
            raise ValueError(f"unknown metric {self.metric!r}")
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise ValueError("method names must be unique")


@dataclass(frozen=True)
class TrialRow:
    method: str
    fraction: float
    trial: int
    metric: str
    value: float
    failed: bool = False


@dataclass(frozen=True)
class AggregateRow:
    method: str
    fraction: float
    metric: str
    mean: float
    stderr: float
    n_ok: int
    n_failed: int
    improvement_over_baseline: float | None = None


@dataclass(frozen=True)
class ExperimentResult:
    rows: tuple[TrialRow, ...]
    aggregates: tuple[AggregateRow, ...]


def _mean_direction(style: str, data: LabeledGraphData, teleport: float) -> np.ndarray:
    from . import graphs
    if style == empirical.RANDOM_WALK_STYLE:
        return np.sqrt(graphs.walk_quantities(data.graph, teleport).pi)
    return np.ones(data.n)


def _empirical_config(spec: EmpiricalMethodSpec, data: LabeledGraphData,
                      sigma2: float, lambda_inv: float) -> empirical.EmpiricalConfig:
    if spec.style == empirical.RANDOM_WALK_STYLE:
        return empirical.random_walk_config(data.graph, sigma2, lambda_inv,
                                            teleport=spec.teleport, rank=spec.rank,
                                            smoother_backend=spec.backend)
    return empirical.tikhonov_config(data.graph, sigma2, lambda_inv,
                                     rank=spec.rank, smoother_backend=spec.backend)


def _score(pred: np.ndarray, data: LabeledGraphData, held_out: np.ndarray,
           metric: str) -> float:
    if metric == MSE:
        return mse(pred, data.y, held_out)
    return 1.0 - auc(pred, data.y, held_out)


def _run_fixed(spec: FixedMethodSpec, data: LabeledGraphData,
               held_in: PartitionedData, held_out: np.ndarray, metric: str) -> float:
    binary = data.kind == BINARY
    base_spec = smoothers.SmootherSpec(method=spec.method, gamma=spec.gamma,
                                       teleport=spec.teleport)
    mu_guess = 0.0
    if not binary:
        X = smoothers.mean_direction(base_spec, data.graph)
        if X.any():
            mu_guess = empirical.estimate_mean(held_in, X, binary=False)
    best = float("inf")
    for lam in spec.lambda_grid:
        params = {"lam": lam} if spec.method in smoothers.FULL_WEIGHT_METHODS \
            else {"lambda0": lam}
        sm = replace(base_spec, mu_guess=mu_guess, **params)
        pred = smoothers.smooth(sm, data.graph, held_in)
        best = min(best, _score(pred, data, held_out, metric))
    return best


def _run_empirical(spec: EmpiricalMethodSpec, data: LabeledGraphData,
                   held_in: PartitionedData, held_out: np.ndarray,
                   metric: str, seed: int) -> float:
    binary = data.kind == BINARY
    config = _empirical_config(spec, data, 1.0, 1.0)
    s2_scale, li_scale = empirical.grid_scales(held_in.y_obs, config.v)
    grid = [(f1 * s2_scale, f2 * li_scale)
            for f1 in spec.sigma2_factors for f2 in spec.lambda_inv_factors]
    cv = empirical.cross_validate(held_in, config, grid, folds=min(spec.cv_folds, held_in.r),
                                  seed=seed, binary=binary)
    config = _empirical_config(spec, data, cv.sigma2, cv.lambda_inv)
    pred = empirical.fit_and_predict(held_in, config, binary=binary)
    return _score(pred, data, held_out, metric)


def _run_baseline(spec: BaselineMethodSpec, data: LabeledGraphData,
                  held_in: PartitionedData, held_out: np.ndarray,
                  metric: str, seed: int) -> float:
    binary = data.kind == BINARY
    if spec.kind == RANDOM_GUESS:
        pred = baseline_predict(held_in, np.zeros(data.n), binary=True, seed=seed)
    else:
        X = _mean_direction(spec.style, data, spec.teleport)
        pred = baseline_predict(held_in, X, binary=binary, seed=seed)
    return _score(pred, data, held_out, metric)


def _run_trial(cfg: ExperimentConfig, data: LabeledGraphData,
               fraction: float, trial: int) -> list[TrialRow]:
    seed = cfg.seed + trial
    rows = []
    try:
        held_in, held_out = holdout_split(data.partitioned(), fraction, seed)
    except ValueError:
        return [TrialRow(m.name, fraction, trial, cfg.metric, float("nan"), failed=True)
                for m in cfg.methods]
    for method in cfg.methods:
        # seed from the method name, not its position, so results do not
        # depend on method ordering
        name_key = zlib.crc32(method.name.encode())
        sub_seed = int(np.random.SeedSequence([seed, name_key]).generate_state(1)[0])
        try:
            if isinstance(method, FixedMethodSpec):
                value = _run_fixed(method, data, held_in, held_out, cfg.metric)
            elif isinstance(method, EmpiricalMethodSpec):
                value = _run_empirical(method, data, held_in, held_out,
                                       cfg.metric, sub_seed)
            else:
                value = _run_baseline(method, data, held_in, held_out,
                                      cfg.metric, sub_seed)
            failed = not np.isfinite(value)
        except Exception:
            value, failed = float("nan"), True
        rows.append(TrialRow(method.name, fraction, trial, cfg.metric, value, failed))
    return rows


def run_experiment(cfg: ExperimentConfig, data: LabeledGraphData) -> ExperimentResult:
    """Run every (method, fraction, trial) cell and aggregate.

    Trials are independent and may run on a thread pool; rows are sorted
    by (method order, fraction, trial) so results do not depend on
    completion order.
    """
    cells = [(f, t) for f in cfg.fractions for t in range(cfg.trials)]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            chunks = list(pool.map(lambda c: _run_trial(cfg, data, *c), cells))
    else:
        chunks = [_run_trial(cfg, data, f, t) for f, t in cells]
    order = {m.name: i for i, m in enumerate(cfg.methods)}
    rows = sorted((row for chunk in chunks for row in chunk),
                  key=lambda r: (order[r.method], r.fraction, r.trial))

    aggregates = []
    means: dict[tuple[str, float], float] = {}
    for method in cfg.methods:
        for fraction in cfg.fractions:
            vals = [r.value for r in rows
                    if r.method == method.name and r.fraction == fraction and not r.failed]
            n_failed = sum(1 for r in rows
                           if r.method == method.name and r.fraction == fraction and r.failed)
            if vals:
                mean_v = float(np.mean(vals))
                stderr = float(np.std(vals, ddof=1) / np.sqrt(len(vals))) if len(vals) > 1 else 0.0
            else:
                mean_v, stderr = float("nan"), float("nan")
            means[(method.name, fraction)] = mean_v
            aggregates.append(AggregateRow(method.name, fraction, cfg.metric,
                                           mean_v, stderr, len(vals), n_failed))
    if cfg.baseline is not None:
        updated = []
        for agg in aggregates:
            base = means.get((cfg.baseline, agg.fraction), float("nan"))
            if agg.method != cfg.baseline and np.isfinite(base) and base != 0:
                imp = (base - agg.mean) / base
                updated.append(replace(agg, improvement_over_baseline=float(imp)))
            else:
                updated.append(agg)
        aggregates = updated
    return ExperimentResult(rows=tuple(rows), aggregates=tuple(aggregates))


def format_value(x: float) -> str:
    """12 significant digits; the package-wide numeric text contract."""
    if isinstance(x, float) and not np.isfinite(x):
        return "nan"
    return f"{x:.12g}"


def rows_to_csv(rows) -> str:
    lines = ["method,fraction,trial,metric,value"]
    for r in rows:
        lines.append(f"{r.method},{format_value(r.fraction)},{r.trial},"
                     f"{r.metric},{format_value(r.value)}")
    return "\n".join(lines) + "\n"


def aggregates_to_csv(aggregates) -> str:
    lines = ["method,fraction,metric,mean,stderr,n_ok,n_failed,improvement_over_baseline"]
    for a in aggregates:
        imp = "" if a.improvement_over_baseline is None \
            else format_value(a.improvement_over_baseline)
        lines.append(f"{a.method},{format_value(a.fraction)},{a.metric},"
                     f"{format_value(a.mean)},{format_value(a.stderr)},"
                     f"{a.n_ok},{a.n_failed},{imp}")
    return "\n".join(lines) + "\n"
