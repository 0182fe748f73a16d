"""CSV ingestion, config parsing, and the fit/simulate/report commands."""

import numpy as np
import pytest

from bartcs.cli import ingest_csv, main, parse_config_file, read_trace
from bartcs.errors import (BadConfig, ExposureDomainError, MissingArtifact,
                           MissingColumn, MissingValue, ParseError)

CSV_HEADER = "y,a,x1,x2\n"


def write_binary_csv(path, n=30, seed=5, p=2):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p))
    a = (rng.random(n) < 0.5).astype(float)
    if a.sum() in (0, n):
        a[0] = 1.0 - a[0]
    y = X[:, 0] - a + rng.normal(scale=0.5, size=n)
    header = "y,a," + ",".join(f"x{j + 1}" for j in range(p))
    lines = [header]
    for i in range(n):
        cells = [f"{y[i]:.6f}", f"{a[i]:.0f}"] + \
            [f"{X[i, j]:.6f}" for j in range(p)]
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_continuous_csv(path, n=30, seed=6):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 2))
    a = rng.uniform(-1.0, 1.0, size=n)
    y = 2.0 * a + X[:, 0] + rng.normal(scale=0.3, size=n)
    lines = [CSV_HEADER.strip()]
    for i in range(n):
        lines.append(f"{y[i]:.6f},{a[i]:.6f},{X[i, 0]:.6f},{X[i, 1]:.6f}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


FIT_FAST = ["--iters", "60", "--burn-in", "20", "--thin", "2",
            "--trees", "5", "--seed", "7"]


class TestIngestCsv:
    def test_three_row_file(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,a,x1\n1.0,0,0.5\n2.0,1,0.1\n3.0,1,-0.2\n")
        ds = ingest_csv(f, "y", "a")
        assert ds.n == 3 and ds.p == 1
        assert ds.names == ("x1",)
        np.testing.assert_array_equal(ds.y, [1.0, 2.0, 3.0])
        np.testing.assert_array_equal(ds.a, [0.0, 1.0, 1.0])

    def test_na_cell(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,a,x1\n1.0,0,NA\n2.0,1,0.1\n")
        with pytest.raises(MissingValue) as err:
            ingest_csv(f, "y", "a")
        assert err.value.row == 2 and err.value.col == "x1"

    def test_non_binary_exposure_value(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,a,x1\n1.0,0,0.5\n2.0,2.0,0.1\n3.0,1,0.2\n")
        with pytest.raises(ExposureDomainError):
            ingest_csv(f, "y", "a")

    def test_missing_column(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,a,x1\n1.0,0,0.5\n")
        with pytest.raises(MissingColumn):
            ingest_csv(f, "y", "treatment")

    def test_ragged_row(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,a,x1\n1.0,0,0.5\n2.0,1\n")
        with pytest.raises(ParseError):
            ingest_csv(f, "y", "a")

    def test_unparseable_cell(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,a,x1\n1.0,0,abc\n2.0,1,0.1\n")
        with pytest.raises(ParseError) as err:
            ingest_csv(f, "y", "a")
        assert err.value.row == 2 and err.value.col == "x1"

    def test_roles_must_differ(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,a,x1\n1.0,0,0.5\n")
        with pytest.raises(BadConfig):
            ingest_csv(f, "y", "y")

    def test_covariate_allowlist_order(self, tmp_path):
        f = write_binary_csv(tmp_path / "d.csv")
        ds = ingest_csv(f, "y", "a", covariates=["x2", "x1"])
        assert ds.names == ("x2", "x1")
        full = ingest_csv(f, "y", "a")
        np.testing.assert_array_equal(ds.X[:, 0], full.X[:, 1])

    def test_no_covariates_left(self, tmp_path):
        f = tmp_path / "d.csv"
        f.write_text("y,a\n1.0,0\n2.0,1\n")
        with pytest.raises(BadConfig):
            ingest_csv(f, "y", "a")

    def test_file_not_found(self, tmp_path):
        with pytest.raises(MissingArtifact):
            ingest_csv(tmp_path / "nope.csv", "y", "a")

    def test_continuous_kind_accepts_reals(self, tmp_path):
        f = write_continuous_csv(tmp_path / "d.csv")
        ds = ingest_csv(f, "y", "a", exposure_kind="continuous")
        assert ds.exposure_kind == "continuous"


class TestConfigFile:
    def test_comments_and_later_wins(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("# schedule\niters = 100  # short\nseed = 1\n"
                     "iters = 200\n")
        values = parse_config_file(f)
        assert values == {"iters": "200", "seed": "1"}

    def test_unknown_key(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("bogus = 1\n")
        with pytest.raises(BadConfig):
            parse_config_file(f)

    def test_missing_equals(self, tmp_path):
        f = tmp_path / "run.cfg"
        f.write_text("iters 100\n")
        with pytest.raises(BadConfig):
            parse_config_file(f)

    def test_file_not_found(self, tmp_path):
        with pytest.raises(BadConfig):
            parse_config_file(tmp_path / "none.cfg")


class TestFitCommand:
    def test_writes_three_artifacts(self, tmp_path, capsys):
        csv_path = write_binary_csv(tmp_path / "d.csv")
        out = tmp_path / "out"
        code = main(["fit", "--input", str(csv_path), "--outcome", "y",
                     "--exposure", "a", "--scheme", "marginal",
                     "--out", str(out)] + FIT_FAST)
        assert code == 0
        assert (out / "trace_0.jsonl").is_file()
        assert (out / "summary.csv").is_file()
        assert (out / "pip.csv").is_file()
        printed = capsys.readouterr().out.splitlines()
        assert len(printed) == 3

        summary = (out / "summary.csv").read_text().splitlines()
        assert summary[0] == "estimand,posterior_mean,ci_low,ci_high,r_hat"
        assert summary[1].startswith("ate,")
        assert summary[1].endswith(",NA")  # one chain: no R-hat

        pip_lines = (out / "pip.csv").read_text().splitlines()
        assert pip_lines[0] == "variable,pip_exposure,pip_outcome,pip_any"
        # marginal scheme: exposure row first, then the two covariates
        assert pip_lines[1].startswith("a,NA,")
        assert [line.split(",")[0] for line in pip_lines[2:]] == ["x1", "x2"]

    def test_reruns_are_byte_identical(self, tmp_path):
        csv_path = write_binary_csv(tmp_path / "d.csv")
        blobs = []
        for sub in ("r1", "r2"):
            out = tmp_path / sub
            assert main(["fit", "--input", str(csv_path), "--outcome", "y",
                         "--exposure", "a", "--out", str(out)] + FIT_FAST) == 0
            blobs.append((out / "trace_0.jsonl").read_bytes())
        assert blobs[0] == blobs[1]

    def test_missing_exposure_is_usage_error(self, tmp_path):
        csv_path = write_binary_csv(tmp_path / "d.csv")
        with pytest.raises(SystemExit) as exc:
            main(["fit", "--input", str(csv_path), "--outcome", "y"])
        assert exc.value.code == 2

    def test_flags_override_config_file(self, tmp_path):
        csv_path = write_binary_csv(tmp_path / "d.csv")
        cfg = tmp_path / "run.cfg"
        cfg.write_text(f"input = {csv_path}\noutcome = y\nexposure = a\n"
                       "iters = 60\nburn_in = 20\nthin = 2\ntrees = 5\n"
                       "seed = 1\n")
        out = tmp_path / "out"
        code = main(["fit", "--config", str(cfg), "--seed", "9",
                     "--out", str(out)])
        assert code == 0
        _, header = read_trace(out / "trace_0.jsonl")
        assert header["seed"] == 9
        assert header["n_iter"] == 60

    def test_two_chains_write_two_traces(self, tmp_path, monkeypatch):
        monkeypatch.setenv("BARTCS_THREADS", "1")
        csv_path = write_binary_csv(tmp_path / "d.csv")
        out = tmp_path / "out"
        code = main(["fit", "--input", str(csv_path), "--outcome", "y",
                     "--exposure", "a", "--chains", "2",
                     "--out", str(out)] + FIT_FAST)
        assert code == 0
        assert (out / "trace_0.jsonl").is_file()
        assert (out / "trace_1.jsonl").is_file()
        summary = (out / "summary.csv").read_text().splitlines()[1]
        assert not summary.endswith(",NA")
        assert float(summary.split(",")[-1]) > 0.0

    def test_runtime_error_prefix(self, tmp_path, capsys):
        csv_path = write_continuous_csv(tmp_path / "d.csv")
        # separate scheme on a CSV whose exposure is not 0/1
        code = main(["fit", "--input", str(csv_path), "--outcome", "y",
                     "--exposure", "a", "--scheme", "separate",
                     "--out", str(tmp_path / "out")] + FIT_FAST)
        assert code == 1
        err = capsys.readouterr().err
        assert err.startswith("ERROR NotBinary:") or \
            err.startswith("ERROR ExposureDomainError:")


SIM_FAST = ["--iters", "40", "--burn-in", "10", "--thin", "3",
            "--trees", "5", "--n", "40", "--p", "2"]


class TestSimulateCommand:
    def test_metrics_layout(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("BARTCS_THREADS", "1")
        out = tmp_path / "out"
        code = main(["simulate", "--scenario", "S_Targeted", "--reps", "2",
                     "--seed", "1", "--out", str(out)] + SIM_FAST)
        assert code == 0
        lines = (out / "metrics.csv").read_text().splitlines()
        assert lines[0] == "scenario,scheme,m,bias,mse,coverage,wall_time_s"
        assert len(lines) == 4  # header + aggregate + 2 replicates
        agg = lines[1].split(",")
        assert agg[0] == "S_Targeted" and agg[1] == "marginal"
        assert agg[2] == "2"
        assert [line.split(",")[2] for line in lines[2:]] == ["1", "1"]
        stdout = capsys.readouterr().out.splitlines()
        assert stdout[0] == lines[0] and stdout[1] == lines[1]

    def test_unknown_scenario_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--scenario", "S99", "--reps", "1"])
        assert exc.value.code == 2

    def test_zero_reps_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--scenario", "S2", "--reps", "0"])
        assert exc.value.code == 2


class TestReportCommand:
    def fit_dir(self, tmp_path, continuous=False, monkeypatch=None):
        name = "cont.csv" if continuous else "bin.csv"
        writer = write_continuous_csv if continuous else write_binary_csv
        csv_path = writer(tmp_path / name)
        out = tmp_path / ("fit_cont" if continuous else "fit_bin")
        argv = ["fit", "--input", str(csv_path), "--outcome", "y",
                "--exposure", "a", "--out", str(out)] + FIT_FAST
        if continuous:
            argv += ["--exposure-kind", "continuous"]
        assert main(argv) == 0
        return csv_path, out

    def test_grid_on_binary_trace_fails(self, tmp_path, capsys):
        csv_path, out = self.fit_dir(tmp_path)
        code = main(["report", "--dir", str(out), "--grid", "5",
                     "--input", str(csv_path)])
        assert code == 1
        assert capsys.readouterr().err.startswith(
            "ERROR UnsupportedForBinary:")

    def test_grid_rows_match_request(self, tmp_path):
        csv_path, out = self.fit_dir(tmp_path, continuous=True)
        code = main(["report", "--dir", str(out), "--grid", "10",
                     "--input", str(csv_path)])
        assert code == 0
        lines = (out / "exposure_response.csv").read_text().splitlines()
        assert lines[0] == "grid_point,posterior_mean,ci_low,ci_high"
        assert len(lines) == 11

    def test_set_nesting_surfaced_verbatim(self, tmp_path, capsys):
        _, out = self.fit_dir(tmp_path)
        code = main(["report", "--dir", str(out), "--x-cap", "x1,x2",
                     "--x-star", "x1"])
        assert code == 1
        err = capsys.readouterr().err
        assert err.startswith("ERROR SetNesting:")
        assert "x_cap must be a subset of x_star" in err

    def test_pip_always_written(self, tmp_path):
        _, out = self.fit_dir(tmp_path)
        report_out = tmp_path / "report"
        code = main(["report", "--dir", str(out), "--out", str(report_out)])
        assert code == 0
        assert (report_out / "pip.csv").is_file()

    def test_class_decomposition_artifact(self, tmp_path, capsys):
        _, out = self.fit_dir(tmp_path)
        code = main(["report", "--dir", str(out), "--x-cap", "x1",
                     "--x-star", "x1,x2"])
        assert code == 0
        lines = (out / "class_decomposition.csv").read_text().splitlines()
        assert lines[0] == "quantity,value"
        cap = float(lines[1].split(",")[1])
        star = float(lines[2].split(",")[1])
        assert 0.0 <= star <= cap <= 1.0

    def test_missing_traces(self, tmp_path, capsys):
        code = main(["report", "--dir", str(tmp_path / "empty")])
        assert code == 1
        assert capsys.readouterr().err.startswith("ERROR MissingArtifact:")
