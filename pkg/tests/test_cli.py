import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from optstop.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_solve_reflected():
    code, text = run("solve", "--example", "reflected", "--alpha", "0.5")
    data = json.loads(text)
    assert code == 0
    assert data["status"] == "RootFound"
    assert data["x0"] == pytest.approx(1.19968, abs=1e-5) and data["u"] == pytest.approx(1.19968, abs=1e-5)


def test_solve_absorbed_reports_discrepancy():
    code, text = run("solve", "--example", "absorbed", "--alpha", "1")
    data = json.loads(text)
    assert code == 0
    assert data["x0"] == 0.0 and data["status"] == "NoPositiveRoot"
    assert "discrepancy" in data["note"]


def test_table_csv():
    code, text = run("table", "--alphas", "0.25,0.5,1,2")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and len(rows) == 4
    assert list(rows[0])[:6] == ["alpha", "x0_running", "x0_stopped", "x0_reflected", "x0_absorbed", "ordering"]
    for row in rows:
        a, o, r = float(row["x0_absorbed"]), float(row["x0_stopped"]), float(row["x0_reflected"])
        assert a == 0.0 < o < r
        assert row["ordering"] == "absorbed<stopped<reflected"
        assert float(row["x0_running"]) == pytest.approx(-1 / np.sqrt(2 * float(row["alpha"])))


def test_verify_exit_codes(capsys):
    assert run("verify", "--example", "stopped", "--alpha", "0.5")[0] == 0
    code, text = run("verify", "--example", "stopped", "--alpha", "0.5", "--x0", "2")
    assert code == 1
    assert "smooth_pasting margin=" in capsys.readouterr().err
    assert json.loads(text)["smooth_pasting"]["margin"] == pytest.approx(1.0, abs=1e-4)


def test_json_round_trip_matches_report():
    from optstop.catalog import build_example
    from optstop.verification import check_conditions
    code, text = run("verify", "--example", "running", "--alpha", "1", "--grid-n", "201")
    report = check_conditions(build_example("running", 1.0).candidate, np.linspace(-5, 5, 201))
    data = json.loads(text)
    for key, value in report.to_dict().items():
        assert data[key] == value


@pytest.mark.parametrize("argv", [
    ("solve", "--example", "nope"),
    ("solve", "--example", "stopped", "--alpha", "0"),
    ("sweep", "--example", "stopped", "--thresholds", "1:0:3"),
    ("simulate", "--example", "reflected", "--x", "-1", "--paths", "10"),
    ("verify", "--example", "stopped", "--grid-min", "2", "--grid-max", "1"),
    ("simulate", "--example", "stopped", "--paths", "0"),
    (),
])
def test_usage_errors(argv):
    assert run(*argv)[0] == 2


def test_simulate_and_sweep_deterministic():
    args = ("simulate", "--example", "stopped", "--alpha", "0.5", "--paths", "2000", "--horizon", "20", "--seed", "3")
    c1, t1 = run(*args)
    c2, t2 = run(*args)
    assert c1 == c2 == 0 and t1 == t2
    data = json.loads(t1)
    assert data["closed_form"] == pytest.approx(np.exp(-1))
    code, text = run("sweep", "--example", "stopped", "--thresholds", "0.5:1.5:5", "--paths", "2000",
                     "--horizon", "20", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert code == 0 and [float(r["x0"]) for r in rows] == [0.5, 0.75, 1.0, 1.25, 1.5]


def test_identity_command():
    code, text = run("identity", "--alpha", "0.5", "--paths", "5000", "--seed", "1")
    data = json.loads(text)
    assert len(data["rows"]) == 3
    assert code == (0 if all(r["within_3se"] for r in data["rows"]) else 1)


def test_plot_data_files(tmp_path):
    code, text = run("verify", "--example", "reflected", "--format", "plot-data", "--out-dir", str(tmp_path))
    assert code == 0
    files = json.loads(text)["files"]
    assert len(files) == 3
    cont = np.loadtxt(tmp_path / "reflected_value_continuation.dat")
    assert cont.shape[1] == 2 and cont[:, 0].max() < 1.2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "optstop", "solve", "--example", "stopped", "--alpha", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["x0"] == 0.5
