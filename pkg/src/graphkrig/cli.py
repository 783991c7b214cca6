"""Command-line interface: dataset description, single prediction runs,
cross-validation reports, full holdout experiments, and export of the
fitted correlation curve.

All numbers are written with 12 significant digits and LF line endings;
all randomness flows from the required ``--seed``. Errors leave a single
``error: ...`` line on stderr and a nonzero exit status.
"""
import argparse
import configparser
import dataclasses
import sys

import numpy as np

from . import empirical, evaluation, graphs, smoothers
from .data import BINARY, CONTINUOUS, LabeledGraphData, load_dataset
from .errors import GraphKrigError
from .evaluation import format_value

FIXED_METHODS = set(smoothers.METHODS)
EMPIRICAL_METHODS = {
    "empirical-random-walk": empirical.RANDOM_WALK_STYLE,
    "empirical-tikhonov": empirical.TIKHONOV_STYLE,
}


def _write_text(path: str, text: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _load(args) -> LabeledGraphData:
    return load_dataset(args.graph, args.labels, kind=args.kind)


def _describe(args) -> int:
    data = _load(args)
    W = data.graph.weights
    n = data.graph.n
    edges = int(np.count_nonzero(W))
    zero_share = 1.0 - edges / float(n * n)
    out_deg = data.graph.out_degrees()
    in_deg = data.graph.in_degrees()
    lines = [
        f"nodes: {n}",
        f"edges: {edges}",
        f"labeled: {data.r}",
        f"volume: {format_value(data.graph.volume())}",
        f"zero_weight_share: {format_value(zero_share)}",
        f"self_loops_dropped: {data.graph.self_loops_dropped}",
    ]
    for name, deg in (("out_degree", out_deg), ("in_degree", in_deg)):
        qs = np.quantile(deg, [0.0, 0.25, 0.5, 0.75, 1.0])
        lines.append(f"{name}_quantiles: " + " ".join(format_value(q) for q in qs))
    print("\n".join(lines))
    return 0


def _build_smoother_spec(args) -> smoothers.SmootherSpec:
    kwargs = {"method": args.method, "teleport": args.teleport, "gamma": args.gamma}
    if args.method in smoothers.FULL_WEIGHT_METHODS:
        kwargs["lam"] = args.lam
    else:
        kwargs["lambda0"] = args.lambda0
    if args.method == smoothers.SPECTRAL_TRANSFORM:
        kwargs["alpha"] = args.alpha
    if args.method == smoothers.MANIFOLD_LINEAR:
        raise GraphKrigError("manifold-linear needs a kernel matrix; use the library API")
    return smoothers.SmootherSpec(**kwargs)


def _empirical_config(args, data: LabeledGraphData,
                      sigma2: float, lambda_inv: float) -> empirical.EmpiricalConfig:
    style = EMPIRICAL_METHODS[args.method]
    if style == empirical.RANDOM_WALK_STYLE:
        return empirical.random_walk_config(data.graph, sigma2, lambda_inv,
                                            teleport=args.teleport, rank=args.rank,
                                            smoother_backend=args.backend)
    return empirical.tikhonov_config(data.graph, sigma2, lambda_inv,
                                     rank=args.rank, smoother_backend=args.backend)


def _predict(args) -> int:
    data = _load(args)
    d = data.partitioned()
    binary = data.kind == BINARY
    if args.method in EMPIRICAL_METHODS:
        config = _empirical_config(args, data, args.sigma2, args.lambda_inv)
        pred = empirical.fit_and_predict(d, config, binary=binary)
    else:
        spec = _build_smoother_spec(args)
        if not binary:
            X = smoothers.mean_direction(spec, data.graph)
            if X.any():
                spec = dataclasses.replace(spec, mu_guess=empirical.estimate_mean(d, X))
        pred = smoothers.smooth(spec, data.graph, d)
    lines = ["node,prediction"]
    lines += [f"{name},{format_value(float(v))}" for name, v in zip(data.node_ids, pred)]
    _write_text(args.output, "\n".join(lines) + "\n")
    return 0


def _cv(args) -> int:
    data = _load(args)
    d = data.partitioned()
    binary = data.kind == BINARY
    config = _empirical_config(args, data, 1.0, 1.0)
    s2_scale, li_scale = empirical.grid_scales(d.y_obs, config.v)
    grid = [(float(a) * s2_scale, float(b) * li_scale)
            for a in args.sigma2_factors.split(",")
            for b in args.lambda_inv_factors.split(",")]
    result = empirical.cross_validate(d, config, grid, folds=args.folds,
                                      seed=args.seed, binary=binary)
    lines = ["sigma2,lambda_inv,score"]
    lines += [f"{format_value(s2)},{format_value(li)},{format_value(sc)}"
              for s2, li, sc in result.table]
    _write_text(args.output, "\n".join(lines) + "\n")
    print(f"selected: sigma2={format_value(result.sigma2)} "
          f"lambda_inv={format_value(result.lambda_inv)}")
    return 0


def _export_rho(args) -> int:
    data = _load(args)
    d = data.partitioned()
    binary = data.kind == BINARY
    config = _empirical_config(args, data, args.sigma2, args.lambda_inv)
    mu = empirical.estimate_mean(d, config.X, binary=binary)
    pairs = empirical.naive_correlations(d, config, mu)
    fit = empirical.fit_correlation(pairs, backend=config.smoother_backend)
    s = config.similarity.s
    curve = empirical.correlation_curve(fit, s[np.triu_indices(data.n, k=1)])
    lines = ["similarity,transformed,rho"]
    lines += [",".join(format_value(v) for v in row) for row in curve]
    _write_text(args.output, "\n".join(lines) + "\n")
    return 0


def _parse_config_file(path: str) -> dict:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise GraphKrigError(f"cannot read config file {path}")
    return {section: dict(parser[section]) for section in parser.sections()}


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def _experiment_config(args) -> evaluation.ExperimentConfig:
    sections = _parse_config_file(args.config) if args.config else {}
    exp = sections.get("experiment", {})
    emp = sections.get("empirical", {})

    fractions = _floats(args.fractions or exp.get("fractions", "0.5"))
    trials = int(args.trials or exp.get("trials", "50"))
    metric = args.metric or exp.get("metric", evaluation.MSE)
    baseline = args.baseline or exp.get("baseline", "")
    method_names = (args.methods or exp.get("methods", "random-walk")).split()
    lambda_grid = _floats(exp.get("lambda_grid", "0.001 0.01 0.1 1 10 100"))
    teleport = float(exp.get("teleport", "0"))
    s2_factors = _floats(emp.get("sigma2_factors", "0.1 0.5 1 2 5 10"))
    li_factors = _floats(emp.get("lambda_inv_factors", "0.001 0.01 0.1 1"))
    folds = int(emp.get("folds", "10"))
    backend = emp.get("backend", empirical.AUTO_BACKEND)
    rank = emp.get("rank", "")
    rank = int(rank) if rank else None

    methods: list[evaluation.MethodSpec] = []
    for name in method_names:
        if name in FIXED_METHODS:
            methods.append(evaluation.FixedMethodSpec(
                name=name, method=name, teleport=teleport, lambda_grid=lambda_grid))
        elif name in EMPIRICAL_METHODS:
            methods.append(evaluation.EmpiricalMethodSpec(
                name=name, style=EMPIRICAL_METHODS[name], rank=rank, backend=backend,
                teleport=teleport, cv_folds=folds, sigma2_factors=s2_factors,
                lambda_inv_factors=li_factors))
        elif name == "baseline-regress-x":
            style = empirical.RANDOM_WALK_STYLE if metric == evaluation.MSE \
                else empirical.TIKHONOV_STYLE
            methods.append(evaluation.BaselineMethodSpec(
                name=name, kind=evaluation.REGRESS_ON_X, style=style, teleport=teleport))
        elif name == "baseline-random":
            methods.append(evaluation.BaselineMethodSpec(
                name=name, kind=evaluation.RANDOM_GUESS))
        else:
            raise GraphKrigError(f"unknown method {name!r}")
    return evaluation.ExperimentConfig(
        methods=tuple(methods), fractions=fractions, trials=trials, seed=args.seed,
        metric=metric, baseline=baseline or None, threads=args.threads)


def _experiment(args) -> int:
    data = _load(args)
    cfg = _experiment_config(args)
    result = evaluation.run_experiment(cfg, data)
    _write_text(args.output, evaluation.rows_to_csv(result.rows))
    _write_text(args.aggregate_output, evaluation.aggregates_to_csv(result.aggregates))
    print(f"wrote {len(result.rows)} trial rows to {args.output} and "
          f"{len(result.aggregates)} aggregate rows to {args.aggregate_output}")
    return 0


def _add_dataset_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--graph", required=True, help="edge-list TSV (src, dst, optional weight)")
    p.add_argument("--labels", required=True, help="labels CSV (node,label)")
    p.add_argument("--kind", choices=[CONTINUOUS, BINARY], default=CONTINUOUS)


def _add_empirical_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--lambda-inv", dest="lambda_inv", type=float, default=0.01)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--backend", default=empirical.AUTO_BACKEND,
                   choices=[empirical.AUTO_BACKEND, empirical.SPLINE_BACKEND,
                            empirical.GROUP_AVERAGE_BACKEND])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphkrig",
        description="Kriging-based semi-supervised learning on graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("describe", help="print graph statistics")
    _add_dataset_arguments(p)
    p.set_defaults(func=_describe)

    p = sub.add_parser("predict", help="predict every node with one method")
    _add_dataset_arguments(p)
    p.add_argument("--method", required=True,
                   choices=sorted(FIXED_METHODS | set(EMPIRICAL_METHODS)))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--lambda0", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--teleport", type=float, default=0.0)
    _add_empirical_arguments(p)
    p.add_argument("--output", default="predictions.csv")
    p.set_defaults(func=_predict)

    p = sub.add_parser("cv", help="cross-validation grid report for an empirical method")
    _add_dataset_arguments(p)
    p.add_argument("--method", required=True, choices=sorted(EMPIRICAL_METHODS))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--teleport", type=float, default=0.0)
    p.add_argument("--sigma2-factors", default="0.1,0.5,1,2,5,10")
    p.add_argument("--lambda-inv-factors", default="0.001,0.01,0.1,1")
    _add_empirical_arguments(p)
    p.add_argument("--output", default="cv.csv")
    p.set_defaults(func=_cv)

    p = sub.add_parser("experiment", help="full holdout experiment from a config file")
    _add_dataset_arguments(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--config", default=None, help="INI config file")
    p.add_argument("--fractions", default=None, help="override holdout fractions")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--metric", default=None,
                   choices=[evaluation.MSE, evaluation.ONE_MINUS_AUC])
    p.add_argument("--methods", default=None, help="override method list (space separated)")
    p.add_argument("--baseline", default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--output", default="results.csv")
    p.add_argument("--aggregate-output", default="aggregates.csv")
    p.set_defaults(func=_experiment)

    p = sub.add_parser("export-rho", help="export the fitted correlation curve")
    _add_dataset_arguments(p)
    p.add_argument("--method", default="empirical-random-walk",
                   choices=sorted(EMPIRICAL_METHODS))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--teleport", type=float, default=0.0)
    _add_empirical_arguments(p)
    p.add_argument("--output", default="rho.csv")
    p.set_defaults(func=_export_rho)

    return parser


def run_command(argv: list[str] | None = None) -> int:
    """Parse arguments and run a subcommand; returns the exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GraphKrigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
