import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from asympde.cli import main
from asympde.oracle import read_binary, read_csv


def rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_exponents_table(tmp_path):
    out = tmp_path / "e.csv"
    assert main(["exponents", "--n-max", "3", "--out", str(out)]) == 0
    r = rows(out)
    assert r[0][:4] == ["n", "sigma", "mu", "kappa"]
    assert r[1][:4] == ["1", "3/4", "1/2", "1/4"]
    assert r[2][3] == "1/6"
    assert r[0][-1] == "balance_ok"
    assert all(line[-1] == "1" for line in r[1:])


def test_exponents_to_stdout(capsys):
    assert main(["exponents", "--n-max", "2"]) == 0
    assert capsys.readouterr().out.splitlines()[2].startswith("2,5/6,2/3,1/6")


def test_residual_order_n2_report(tmp_path):
    out = tmp_path / "r.json"
    code = main(["residual-order", "--n", "2", "--eps", "1e-2,1e-3,1e-4", "--samples", "512",
                 "--out", str(out)])
    rep = json.loads(out.read_text())
    assert rep["predicted_order_exact"] == "1/6"
    assert rep["predicted_order"] == pytest.approx(1 / 6)
    assert code == (0 if rep["meta"]["within_band"] else 1)
    assert code == 0


def test_residual_order_quadratic_flags_near_zero(tmp_path):
    out = tmp_path / "q.json"
    code = main(["residual-order", "--flux", "quadratic", "--eps", "1e-2,1e-3,1e-4", "--samples", "256",
                 "--out", str(out)])
    rep = json.loads(out.read_text())
    assert rep["meta"]["near_zero_residuals"] is True
    assert all(e["ratio"] <= 1e-9 for e in rep["entries"])
    assert code == 1


def test_residual_order_band_failure_exit_1(tmp_path):
    out = tmp_path / "r.json"
    assert main(["residual-order", "--eps", "1e-2,1e-3,1e-4", "--samples", "256", "--band", "1e-6",
                 "--out", str(out)]) == 1


@pytest.mark.parametrize("argv", [
    ["residual-order", "--n", "0"],
    ["residual-order", "--eps", "1e-2,1e-3"],
    ["residual-order", "--eps", "abc"],
    ["residual-order", "--flux", "quartic"],
    ["fold-profile", "--phi2", "-1"],
    ["tanh-check", "--tau", "-1"],
    ["initial-layer", "--nu-minus", "1", "--nu-plus", "1"],
    ["initial-layer", "--mu", "1.5"],
    ["oracle-run"],
    ["no-such-command"],
])
def test_config_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_degenerate_initial_data_message(capsys):
    assert main(["initial-layer", "--nu-minus", "0.5", "--nu-plus", "0.5"]) == 2
    assert "degenerate" in capsys.readouterr().err


def test_fold_profile_columns_and_values(tmp_path):
    out = tmp_path / "f.csv"
    assert main(["fold-profile", "--tau=-5,-20", "--points", "5", "--out", str(out)]) == 0
    r = rows(out)
    assert r[0] == ["xi", "tau", "w10", "H_over_phi2", "difference"]
    data = np.array(r[1:], dtype=float)
    mid = data[data[:, 0] == 0.0]
    assert np.all(mid[:, 2] == 0.0)
    at1 = {row[1]: abs(row[4]) for row in data if row[0] == 1.5}
    assert at1[-20.0] < at1[-5.0]


def test_tanh_check_table(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["tanh-check", "--points", "7", "--out", str(out)]) == 0
    r = rows(out)
    assert r[0][-3:] == ["z", "tanh_profile", "tanh_difference"]
    data = np.array(r[1:], dtype=float)
    sups = [np.max(np.abs(data[data[:, 1] == tau][:, -1])) for tau in (10.0, 20.0, 40.0)]
    assert sups[0] > sups[1] > sups[2]
    out2 = tmp_path / "t2.csv"
    assert main(["fold-profile", "--tanh", "--tau", "10,20,40", "--points", "7", "--out", str(out2)]) == 0
    assert out2.read_bytes() == out.read_bytes()


def test_outputs_are_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["residual-order", "--eps", "1e-2,1e-3,1e-4", "--samples", "256"]
    main(argv + ["--out", str(a)])
    main(argv + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    c, d = tmp_path / "c.csv", tmp_path / "d.csv"
    main(["fold-profile", "--points", "9", "--out", str(c)])
    main(["fold-profile", "--points", "9", "--out", str(d)])
    assert c.read_bytes() == d.read_bytes()


def test_config_file_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n-max": 2, "points": 3}))
    out = tmp_path / "e.csv"
    assert main(["exponents", "--config", str(cfg), "--out", str(out)]) == 0
    assert len(rows(out)) == 3
    assert main(["exponents", "--config", str(cfg), "--n-max", "4", "--out", str(out)]) == 0
    assert len(rows(out)) == 5
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert main(["exponents", "--config", str(bad)]) == 2
    assert main(["exponents", "--config", str(tmp_path / "missing.json")]) == 2


def test_oracle_run_formats(tmp_path):
    common = ["oracle-run", "--initial", "shock", "--nx", "101", "--nt", "3", "--t-end", "0.2"]
    assert main(common + ["--out", str(tmp_path / "o.csv")]) == 0
    assert main(common + ["--format", "bin", "--out", str(tmp_path / "o.bin")]) == 0
    a = read_csv(tmp_path / "o.csv")
    b = read_binary(tmp_path / "o.bin")
    np.testing.assert_array_equal(a.values, b.values)
    assert a.values.shape == (3, 101)


def test_oracle_run_constant(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["oracle-run", "--initial", "constant", "--value", "0.4", "--flux", "cubic",
                 "--nx", "32", "--nt", "3", "--out", str(out)]) == 0
    assert np.all(read_csv(out).values == 0.4)


def test_initial_layer_small_run(tmp_path):
    out = tmp_path / "il.csv"
    argv = ["initial-layer", "--mu", "0.2", "--theta-max", "1", "--nt", "6", "--window", "4"]
    assert main(argv + ["--out", str(out)]) == 0
    r = rows(out)
    assert r[0] == ["mu", "rho", "eps", "sup_err_composite", "sup_err_renormalized"]
    assert len(r) == 2 and float(r[1][3]) > 0
    field = tmp_path / "ilf.csv"
    assert main(argv + ["--table", "field", "--out", str(field)]) == 0
    data = np.array(rows(field)[1:], dtype=float)
    first = data[data[:, 2] == 0.0]
    # oracle column equals the initial data on the first slice
    np.testing.assert_allclose(first[:, 3], -np.tanh(first[:, 1] / 0.002), rtol=0, atol=1e-15)


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "asympde.cli", "exponents", "--n-max", "1"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines()[1].startswith("1,3/4,1/2,1/4")
    res = subprocess.run([sys.executable, "-m", "asympde.cli", "residual-order", "--n", "0"],
                         capture_output=True, text=True)
    assert res.returncode == 2


def test_help_lists_defaults(capsys):
    assert main(["residual-order", "--help"]) == 0
    text = capsys.readouterr().out
    assert "default: 10000" in text
