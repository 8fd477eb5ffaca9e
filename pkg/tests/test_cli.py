import csv
import io
import json
import subprocess
import sys

import pytest

from qcx.cli import JET_COLUMNS, main
from qcx.distortion import BOUNDS_COLUMNS


def write(tmp_path, obj, name="map.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(p)


TWO_SLOPE = {"kind": "builtin", "name": "two_slope", "params": {"a": 2.0}}
LOG = {"kind": "builtin", "name": "log_singular"}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_jet_point_golden(tmp_path, capsys, goldens):
    code, out, _ = run(capsys, "jet", "--map", write(tmp_path, TWO_SLOPE), "--point", "0,1")
    assert code == 0
    d = json.loads(out)
    assert d["dilatation_K"] == pytest.approx(goldens["two_slope_2_at_0_1"]["dilatation_K"],
                                              abs=1e-12)


def test_jet_grid_csv_and_threads(tmp_path, capsys):
    m = write(tmp_path, LOG)
    code, one, _ = run(capsys, "jet", "--map", m, "--grid=-1,1,0.01,1,7,5")
    assert code == 0
    code, four, _ = run(capsys, "--threads", "4", "jet", "--map", m, "--grid=-1,1,0.01,1,7,5")
    assert code == 0 and one == four
    rows = list(csv.reader(io.StringIO(one)))
    assert tuple(rows[0]) == JET_COLUMNS and len(rows) == 36


def test_bounds_ok_and_csv(tmp_path, capsys):
    out = tmp_path / "b.csv"
    code, text, _ = run(capsys, "bounds", "--map", write(tmp_path, TWO_SLOPE),
                        "--grid=-2,2,0.001,2,10,10", "--out", str(out))
    assert code == 0
    s = json.loads(text)
    assert s["points_checked"] == 100 and s["lower_violations"] == 0
    header = out.read_text().splitlines()[0].split(",")
    assert tuple(header) == BOUNDS_COLUMNS


def test_rho_point(tmp_path, capsys):
    code, out, _ = run(capsys, "rho", "--map", write(tmp_path, LOG), "--point", "0,0.25")
    d = json.loads(out)
    assert code == 0 and d["rho"] == pytest.approx(1 + 1.3862943611198906, abs=1e-12)


def test_extend_circle_point(tmp_path, capsys):
    m = write(tmp_path, {"kind": "builtin", "name": "rotation", "params": {"theta0": 0.0}})
    code, out, _ = run(capsys, "extend", "--map", m, "--point", "0.25,0")
    d = json.loads(out)
    assert code == 0 and d["re"] == pytest.approx(0.5) and d["im"] == pytest.approx(0.0)


@pytest.mark.parametrize("spec", [
    "{broken",
    {"kind": "piecewise_linear", "points": [[0, 0], [1, 2], [2, 1]], "left_slope": 1,
     "right_slope": 1},
    {"kind": "builtin", "name": "power", "params": {"alpha": 0}},
])
def test_bad_map_exit_2(tmp_path, capsys, spec):
    code, _, err = run(capsys, "jet", "--map", write(tmp_path, spec), "--point", "0,1")
    assert code == 2 and "$" in err


@pytest.mark.parametrize("argv", [
    ["jet", "--point", "0,1"],
    ["jet", "--map", "MAP", "--point", "0,-1"],
    ["jet", "--map", "MAP", "--grid=0,1,0.1"],
    ["integrate", "--map", "MAP", "--phi", "cosh"],
    ["integrate", "--map", "MAP", "--what", "welding"],
    ["--threads", "0", "jet", "--map", "MAP", "--point", "0,1"],
    ["bogus"],
])
def test_input_errors(tmp_path, capsys, argv):
    m = write(tmp_path, TWO_SLOPE)
    code, _, _ = run(capsys, *[m if a == "MAP" else a for a in argv])
    assert code == 2


def test_integrate_verdicts(tmp_path, capsys):
    m = write(tmp_path, LOG)
    code, out, _ = run(capsys, "integrate", "--map", m, "--phi", "exp", "--q", "2")
    assert code == 0 and json.loads(out)["verdict"] == "diverging"


def test_integrate_circle(tmp_path, capsys):
    m = write(tmp_path, {"kind": "builtin", "name": "rotation", "params": {"theta0": 1.0}})
    code, out, _ = run(capsys, "integrate", "--map", m, "--phi", "linear", "--q", "1")
    d = json.loads(out)
    assert code == 0 and d["boundary"]["total"] == pytest.approx(3.141592653589793 ** 2)


def test_bmo_constant(capsys):
    code, out, _ = run(capsys, "bmo", "--field", "const:3", "--k-max", "2")
    assert code == 0 and json.loads(out)["seminorm_lower_bound"] == 0.0


def test_bmo_implication(tmp_path, capsys):
    code, out, _ = run(capsys, "bmo", "--field", "one_plus_log1p_inv_y", "--k-max", "4",
                       "--map", write(tmp_path, LOG), "--grid=-0.5,0.5,1e-4,1,5,5")
    assert code == 0 and json.loads(out)["implication"]["rho_violations"] == 0


def test_render_to_file(tmp_path, capsys):
    out = tmp_path / "r.svg"
    code, _, _ = run(capsys, "render", "--map", write(tmp_path, TWO_SLOPE), "--samples", "20",
                     "--out", str(out))
    assert code == 0 and out.read_text().startswith("<?xml")


def test_oracle_verify_and_goldens(tmp_path, capsys):
    code, out, _ = run(capsys, "oracle", "verify", "--map", write(tmp_path, TWO_SLOPE),
                       "--points", "3")
    assert code == 0
    code, out, _ = run(capsys, "oracle", "goldens")
    assert code == 0 and "welding_l1_identity" in json.loads(out)


def test_output_deterministic_across_runs(tmp_path, capsys):
    m = write(tmp_path, LOG)
    a = run(capsys, "rho", "--map", m, "--grid=-1,1,0.001,1,6,6")[1]
    b = run(capsys, "rho", "--map", m, "--grid=-1,1,0.001,1,6,6")[1]
    assert a == b


def test_console_entry_point(tmp_path):
    m = write(tmp_path, TWO_SLOPE)
    proc = subprocess.run([sys.executable, "-m", "qcx.cli", "jet", "--map", m, "--point",
                           "0,1"], capture_output=True, text=True)
    assert proc.returncode == 0 and "dilatation_K" in proc.stdout


def test_violation_exit_4(tmp_path, capsys, monkeypatch):
    # with C0 = 1 the identity's K = 2 exceeds C0 max{rho, avg} = 1
    from qcx import distortion
    monkeypatch.setattr(distortion, "C0", 1.0)
    m = write(tmp_path, {"kind": "builtin", "name": "identity"})
    code, out, _ = run(capsys, "bounds", "--map", m, "--grid=-1,1,0.1,1,3,3")
    assert code == 4 and json.loads(out)["upper_violations"] == 9


def test_numeric_exit_3(tmp_path, capsys, monkeypatch):
    from qcx import cli
    from qcx.errors import ConsistencyError

    def broken(*a, **k):
        raise ConsistencyError("non-positive Jacobian of the extension")

    monkeypatch.setattr(cli, "jet", broken)
    code, _, err = run(capsys, "jet", "--map", write(tmp_path, TWO_SLOPE), "--point", "0,1")
    assert code == 3 and "numerical failure" in err
