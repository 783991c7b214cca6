"""End-to-end tests of the command-line interface on toy datasets."""
import numpy as np
import pytest

from graphkrig.cli import run_command
from graphkrig.data import load_dataset
from graphkrig.errors import DataFormatError
from graphkrig.evaluation import format_value, mse


def write_toy_dataset(tmp_path, n=8, seed=0, binary=False, labeled=None):
    rng = np.random.default_rng(seed)
    names = [f"n{i}" for i in range(n)]
    lines = []
    for i in range(n):
        j = (i + 1) % n
        lines.append(f"{names[i]}\t{names[j]}\t{rng.uniform(0.5, 2.0):.6f}")
        lines.append(f"{names[j]}\t{names[i]}\t1.0")
    for _ in range(n):
        i, j = rng.integers(0, n, size=2)
        if i != j:
            w = rng.uniform(0.5, 2.0)
            lines.append(f"{names[i]}\t{names[j]}\t{w:.6f}")
            lines.append(f"{names[j]}\t{names[i]}\t{w:.6f}")
    graph_path = tmp_path / "graph.tsv"
    graph_path.write_text("\n".join(lines) + "\n")

    labeled = list(range(n)) if labeled is None else labeled
    rows = ["node,label"]
    for i in labeled:
        if binary:
            value = "1" if rng.uniform() < 0.5 else "-1"
        else:
            value = f"{rng.normal(loc=2.0):.6f}"
        rows.append(f"{names[i]},{value}")
    labels_path = tmp_path / "labels.csv"
    labels_path.write_text("\n".join(rows) + "\n")
    return graph_path, labels_path


class TestLoadDataset:
    def test_basic(self, tmp_path):
        graph, labels = write_toy_dataset(tmp_path, labeled=[0, 2, 3])
        data = load_dataset(graph, labels)
        assert data.n == 8
        assert data.r == 3

    def test_two_line_file_one_label(self, tmp_path):
        (tmp_path / "g.tsv").write_text("a\tb\nb\ta\n")
        (tmp_path / "l.csv").write_text("a,1.5\n")
        data = load_dataset(tmp_path / "g.tsv", tmp_path / "l.csv")
        assert data.n == 2 and data.r == 1

    def test_binary_zero_rejected(self, tmp_path):
        (tmp_path / "g.tsv").write_text("a\tb\nb\ta\n")
        (tmp_path / "l.csv").write_text("a,0\n")
        with pytest.raises(DataFormatError, match="-1 or 1"):
            load_dataset(tmp_path / "g.tsv", tmp_path / "l.csv", kind="binary")

    def test_duplicate_label_rejected(self, tmp_path):
        (tmp_path / "g.tsv").write_text("a\tb\nb\ta\n")
        (tmp_path / "l.csv").write_text("a,1\na,2\n")
        with pytest.raises(DataFormatError, match="twice"):
            load_dataset(tmp_path / "g.tsv", tmp_path / "l.csv")

    def test_unknown_node_named(self, tmp_path):
        (tmp_path / "g.tsv").write_text("a\tb\nb\ta\n")
        (tmp_path / "l.csv").write_text("zz,1\n")
        with pytest.raises(DataFormatError, match="zz"):
            load_dataset(tmp_path / "g.tsv", tmp_path / "l.csv")

    def test_malformed_edge_line_numbered(self, tmp_path):
        (tmp_path / "g.tsv").write_text("a\tb\nbroken\n")
        (tmp_path / "l.csv").write_text("a,1\n")
        with pytest.raises(DataFormatError, match="line 2"):
            load_dataset(tmp_path / "g.tsv", tmp_path / "l.csv")


class TestDescribe:
    def test_reports_zero_share(self, tmp_path, capsys):
        (tmp_path / "g.tsv").write_text("a\tb\nb\tc\nc\ta\n")
        (tmp_path / "l.csv").write_text("a,1\n")
        status = run_command(["describe", "--graph", str(tmp_path / "g.tsv"),
                              "--labels", str(tmp_path / "l.csv")])
        assert status == 0
        out = capsys.readouterr().out
        assert "nodes: 3" in out
        assert "edges: 3" in out
        # 3 of 9 entries nonzero
        assert "zero_weight_share: 0.666666666667" in out

    def test_degree_quantiles_present(self, tmp_path, capsys):
        graph, labels = write_toy_dataset(tmp_path)
        run_command(["describe", "--graph", str(graph), "--labels", str(labels)])
        out = capsys.readouterr().out
        assert "out_degree_quantiles:" in out
        assert "in_degree_quantiles:" in out


class TestPredict:
    def test_fixed_method_csv_shape(self, tmp_path):
        graph, labels = write_toy_dataset(tmp_path, labeled=[0, 1, 2, 3, 4])
        out = tmp_path / "pred.csv"
        status = run_command(["predict", "--graph", str(graph), "--labels", str(labels),
                              "--method", "random-walk", "--lambda", "1",
                              "--seed", "0", "--output", str(out)])
        assert status == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "node,prediction"
        assert len(lines) == 9

    def test_empirical_method_runs(self, tmp_path):
        graph, labels = write_toy_dataset(tmp_path)
        out = tmp_path / "pred.csv"
        status = run_command(["predict", "--graph", str(graph), "--labels", str(labels),
                              "--method", "empirical-random-walk", "--sigma2", "1.0",
                              "--lambda-inv", "0.1", "--seed", "0",
                              "--output", str(out)])
        assert status == 0
        assert len(out.read_text().splitlines()) == 9

    def test_round_trip_rescoring_is_bit_exact(self, tmp_path):
        graph, labels = write_toy_dataset(tmp_path)
        out = tmp_path / "pred.csv"
        run_command(["predict", "--graph", str(graph), "--labels", str(labels),
                     "--method", "random-walk", "--lambda", "1", "--seed", "0",
                     "--output", str(out)])
        data = load_dataset(graph, labels)
        rows = [line.split(",") for line in out.read_text().splitlines()[1:]]
        re_read = np.array([float(v) for _, v in rows])
        idx = np.flatnonzero(data.observed)
        first = mse(re_read, data.y, idx)
        rows2 = [line.split(",") for line in out.read_text().splitlines()[1:]]
        re_read2 = np.array([float(v) for _, v in rows2])
        assert mse(re_read2, data.y, idx) == first

    def test_identical_argv_identical_bytes(self, tmp_path):
        graph, labels = write_toy_dataset(tmp_path)
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["predict", "--graph", str(graph), "--labels", str(labels),
                "--method", "empirical-random-walk", "--seed", "42"]
        run_command(argv + ["--output", str(out1)])
        run_command(argv + ["--output", str(out2)])
        assert out1.read_bytes() == out2.read_bytes()


class TestCv:
    def test_writes_grid_and_selection(self, tmp_path, capsys):
        graph, labels = write_toy_dataset(tmp_path, n=12)
        out = tmp_path / "cv.csv"
        status = run_command(["cv", "--graph", str(graph), "--labels", str(labels),
                              "--method", "empirical-random-walk", "--seed", "1",
                              "--folds", "3", "--sigma2-factors", "0.5,1",
                              "--lambda-inv-factors", "0.1,1", "--output", str(out)])
        assert status == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "sigma2,lambda_inv,score"
        assert len(lines) == 5
        assert "selected:" in capsys.readouterr().out


class TestExperiment:
    def test_aggregate_rows_per_fraction(self, tmp_path):
        graph, labels = write_toy_dataset(tmp_path, n=14)
        out, agg = tmp_path / "r.csv", tmp_path / "a.csv"
        status = run_command([
            "experiment", "--graph", str(graph), "--labels", str(labels),
            "--seed", "0", "--trials", "2", "--fractions", "0.3 0.5",
            "--methods", "random-walk baseline-regress-x",
            "--baseline", "baseline-regress-x",
            "--output", str(out), "--aggregate-output", str(agg)])
        assert status == 0
        rows = out.read_text().splitlines()
        assert len(rows) == 1 + 2 * 2 * 2  # header + methods x fractions x trials
        agg_rows = agg.read_text().splitlines()
        assert len(agg_rows) == 1 + 2 * 2

    def test_config_file_drives_run(self, tmp_path):
        graph, labels = write_toy_dataset(tmp_path, n=12)
        config = tmp_path / "exp.ini"
        config.write_text(
            "[experiment]\n"
            "fractions = 0.5\n"
            "trials = 1\n"
            "metric = mse\n"
            "methods = zhou2004\n"
            "lambda_grid = 0.1 1\n")
        out, agg = tmp_path / "r.csv", tmp_path / "a.csv"
        status = run_command([
            "experiment", "--graph", str(graph), "--labels", str(labels),
            "--seed", "3", "--config", str(config),
            "--output", str(out), "--aggregate-output", str(agg)])
        assert status == 0
        assert "zhou2004" in out.read_text()


class TestExportRho:
    def test_curve_csv(self, tmp_path):
        graph, labels = write_toy_dataset(tmp_path, n=12)
        out = tmp_path / "rho.csv"
        status = run_command(["export-rho", "--graph", str(graph),
                              "--labels", str(labels), "--seed", "0",
                              "--sigma2", "5", "--lambda-inv", "0.01",
                              "--output", str(out)])
        assert status == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "similarity,transformed,rho"
        assert len(lines) > 1


class TestErrors:
    def test_missing_file_one_line_error(self, tmp_path, capsys):
        status = run_command(["describe", "--graph", str(tmp_path / "nope.tsv"),
                              "--labels", str(tmp_path / "nope.csv")])
        assert status == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert len(err.strip().splitlines()) == 1

    def test_unknown_method_in_experiment(self, tmp_path, capsys):
        graph, labels = write_toy_dataset(tmp_path)
        status = run_command(["experiment", "--graph", str(graph),
                              "--labels", str(labels), "--seed", "0",
                              "--methods", "definitely-not-a-method"])
        assert status == 1
        assert "error:" in capsys.readouterr().err


def test_format_contract_uses_lf(tmp_path):
    graph, labels = write_toy_dataset(tmp_path)
    out = tmp_path / "pred.csv"
    run_command(["predict", "--graph", str(graph), "--labels", str(labels),
                 "--method", "random-walk", "--seed", "0", "--output", str(out)])
    raw = out.read_bytes()
    assert b"\r" not in raw
    assert raw.endswith(b"\n")
