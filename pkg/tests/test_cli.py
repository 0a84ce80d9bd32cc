import json

import numpy as np
import pytest

from acscreen.cli import main


@pytest.fixture
def table(tmp_path):
    rng = np.random.default_rng(1)
    X = rng.standard_normal((120, 5))
    y = 2 * X[:, 0] - X[:, 3] + rng.standard_normal(120)
    p = tmp_path / "data.csv"
    lines = ["y," + ",".join(f"g{j}" for j in range(5))]
    lines += [",".join(repr(float(v)) for v in (y[i], *X[i])) for i in range(120)]
    p.write_text("\n".join(lines) + "\n")
    return p


def _run(tmp_path, table, *extra, out="out"):
    return main(["screen", "--input", str(table), "--response", "y", "--output",
                 str(tmp_path / out), *extra])


def test_screen_top_k(tmp_path, table, capsys):
    assert _run(tmp_path, table, "--measure", "kendall", "--m", "4", "--top-k", "2") == 0
    out = tmp_path / "out"
    kept = [r.split(",")[1] for r in (out / "retained.csv").read_text().splitlines()[1:]]
    assert kept == ["g0", "g3"]
    est = (out / "estimates.csv").read_text().splitlines()
    assert est[0] == "index,feature,estimate,method,m,flag" and len(est) == 6
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "screen" and man["seed"] == 0
    assert set(man["outputs"]) == {"estimates.csv", "retained.csv"}
    assert "retained 2 of 5" in capsys.readouterr().out


@pytest.mark.parametrize("method", ["acs", "sas", "racs", "centralized"])
@pytest.mark.parametrize("measure", ["pearson", "kendall", "sirs", "dc"])
def test_screen_methods(tmp_path, table, method, measure):
    assert _run(tmp_path, table, "--measure", measure, "--m", "3", "--gamma", "0.05",
                "--method", method) == 0


def test_screen_dump_components(tmp_path, table):
    assert _run(tmp_path, table, "--measure", "dc", "--m", "2", "--gamma", "0.1",
                "--dump-components") == 0
    comps = json.loads((tmp_path / "out" / "components.json").read_text())
    assert len(comps["g0"]["dydx"]) == 2


def test_screen_reruns_identical(tmp_path, table):
    args = ("--measure", "sirs", "--m", "6", "--top-k", "3", "--method", "racs", "--seed", "5")
    assert _run(tmp_path, table, *args, out="a") == 0
    assert _run(tmp_path, table, *args, out="b") == 0
    for name in ("estimates.csv", "retained.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.parametrize(
    "extra",
    [
        ("--measure", "kendall", "--m", "0", "--top-k", "2"),
        ("--measure", "kendall", "--m", "2"),
        ("--measure", "kendall", "--m", "2", "--top-k", "2", "--gamma", "0.1"),
        ("--measure", "spearman", "--m", "2", "--top-k", "2"),
        ("--measure", "kendall", "--m", "2", "--gamma", "-1"),
        ("--measure", "kendall", "--m", "2", "--top-k", "9"),
    ],
)
def test_usage_errors_exit_1(tmp_path, table, extra, capsys):
    assert _run(tmp_path, table, *extra) == 1
    assert "usage error" in capsys.readouterr().err


def test_data_errors_exit_2(tmp_path, table, capsys):
    assert _run(tmp_path, table, "--measure", "kendall", "--m", "500", "--top-k", "2") == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("y,a\n1,2\n3,oops\n")
    assert main(["screen", "--input", str(bad), "--response", "y", "--measure", "kendall",
                 "--top-k", "1", "--output", str(tmp_path / "o")]) == 2
    assert "row 3, column 'a'" in capsys.readouterr().err


def test_all_degenerate_exit_3(tmp_path):
    p = tmp_path / "const.csv"
    p.write_text("y,a\n" + "".join(f"{i},1\n" for i in range(10)))
    assert main(["screen", "--input", str(p), "--response", "y", "--measure", "dc",
                 "--top-k", "1", "--output", str(tmp_path / "o")]) == 3


def test_threads_env_validated(tmp_path, table, monkeypatch):
    monkeypatch.setenv("ACSCREEN_THREADS", "zero")
    assert _run(tmp_path, table, "--measure", "kendall", "--top-k", "1") == 1


def test_simulate(tmp_path):
    out = tmp_path / "sim"
    argv = ["simulate", "--model", "a", "--measure", "pearson", "--N", "300", "--p", "30",
            "--m", "5", "--T", "2", "--no-timing", "--output", str(out)]
    assert main(argv) == 0
    rows = (out / "metrics.csv").read_text().splitlines()
    assert rows[0] == "model,N,p,m,measure,method,rho,SSR,MS,Std(MS),PSR,FDR,Time^n,Time^N"
    assert [r.split(",")[5] for r in rows[1:]] == ["SAS", "ACS", "rACS"]
    assert rows[2].endswith("NA,NA")
    first = (out / "metrics.csv").read_bytes()
    assert main(argv) == 0
    assert (out / "metrics.csv").read_bytes() == first


def test_simulate_bad_config(tmp_path):
    assert main(["simulate", "--model", "f", "--measure", "dc", "--p", "10",
                 "--output", str(tmp_path)]) == 1


def test_rmse_bench(tmp_path):
    out = tmp_path / "r"
    assert main(["rmse-bench", "--N", "90", "--m-list", "3,9", "--T", "3", "--measures",
                 "kendall,sirs", "--no-timing", "--output", str(out)]) == 0
    rows = (out / "rmse.csv").read_text().splitlines()
    assert rows[0] == "measure,method,m,RMSE,SE,time"
    assert len(rows) == 1 + 2 * 3 * 2
    assert main(["rmse-bench", "--measures", "foo", "--output", str(out)]) == 1
    assert main(["rmse-bench", "--N", "10", "--m-list", "20", "--output", str(out)]) == 2
