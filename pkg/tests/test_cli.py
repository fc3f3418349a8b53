import json
import math
import os
import subprocess
import sys

import pytest

from solitonlab import __version__
from solitonlab.cli import run

GOLDEN = {
    "futaki_blp2": ["futaki", "--in", "inputs/blp2.json", "--xi", "1,1"],
    "soliton_kr_blp2": ["soliton", "--family", "kr", "--in", "inputs/blp2.json"],
    "soliton_mabuchi_blp2": ["soliton", "--family", "mabuchi", "--in", "inputs/blp2.json"],
    "msy_conifold": ["msy", "--in", "inputs/conifold.json"],
    "msy_c3": ["msy", "--in", "inputs/c3.json"],
    "quotient_conifold": ["quotient", "--in", "inputs/conifold.json", "--chi", "0,0,3/2"],
    "crosscheck_conifold": ["crosscheck", "--in", "inputs/conifold.json"],
    "delta_blp2": ["delta", "--in", "inputs/blp2.json"],
    "delta_reduced_kr": ["delta", "--in", "inputs/blp2.json", "--family", "kr", "--reduced"],
    "na_blp2": ["na", "--in", "inputs/blp2_filtration.json"],
    "ode1d_p1": ["ode1d", "--in", "inputs/p1.json"],
    "ode1d_teardrop": ["ode1d", "--in", "inputs/teardrop.json"],
}

EXIT = {"ode1d_teardrop": 2}


@pytest.fixture(autouse=True)
def in_repo(repo_root, monkeypatch):
    monkeypatch.chdir(repo_root)


def invoke(argv, capsys):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def close(a, b, path="$"):
    """Structural equality with a relative float tolerance (BLAS order can move the last bits)."""
    if isinstance(a, float) or isinstance(b, float):
        assert isinstance(a, (int, float)) and isinstance(b, (int, float)), path
        assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12), f"{path}: {a} != {b}"
    elif isinstance(a, dict):
        assert sorted(a) == sorted(b), path
        for k in a:
            close(a[k], b[k], f"{path}.{k}")
    elif isinstance(a, list):
        assert len(a) == len(b), path
        for i, (x, y) in enumerate(zip(a, b)):
            close(x, y, f"{path}[{i}]")
    else:
        assert a == b, f"{path}: {a!r} != {b!r}"


@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden(name, capsys, repo_root):
    code, out, _ = invoke(GOLDEN[name], capsys)
    assert code == EXIT.get(name, 0)
    path = repo_root / "tests" / "golden" / f"{name}.json"
    if os.environ.get("SOLITONLAB_UPDATE_GOLDEN"):
        path.write_text(out)
    close(json.loads(out), json.loads(path.read_text()))


@pytest.mark.parametrize("name", ["soliton_kr_blp2", "na_blp2", "delta_blp2"])
def test_reruns_are_byte_identical(name, capsys):
    _, a, _ = invoke(GOLDEN[name], capsys)
    _, b, _ = invoke(GOLDEN[name], capsys)
    assert a == b


def test_kr_report_values(capsys):
    _, out, _ = invoke(GOLDEN["soliton_kr_blp2"], capsys)
    r = json.loads(out)["result"]
    assert r["xi_star"] == pytest.approx([-0.528, -0.528], abs=5e-3)
    assert r["residual"] < 1e-10


def test_msy_report_values(capsys):
    _, out, _ = invoke(GOLDEN["msy_conifold"], capsys)
    r = json.loads(out)["result"]
    assert r["vol_star"] == pytest.approx(16 / 27, abs=1e-12)
    assert r["xi_star"] == pytest.approx([0, 0, 1.5], abs=1e-10)


def test_obstructed_error_object(capsys):
    code, out, err = invoke(GOLDEN["ode1d_teardrop"], capsys)
    doc = json.loads(out)
    assert code == 2
    assert doc["error"]["type"] == "ObstructedFutaki"
    assert doc["error"]["exit_code"] == 2
    assert "ObstructedFutaki" in err


def test_schema_violation_exit_1(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"polytope": {"vertices": [[0], [1]]}, "oops": 1}))
    code, out, _ = invoke(["futaki", "--in", str(p), "--xi", "1"], capsys)
    doc = json.loads(out)
    assert code == 1
    assert doc["error"]["type"] == "SchemaError"
    assert doc["status"] == "SchemaError"


def test_missing_input(capsys):
    code, out, _ = invoke(["msy"], capsys)
    assert code == 1
    assert json.loads(out)["error"]["type"] == "InputError"


def test_infeasible_soliton_exit_2(tmp_path, capsys):
    p = tmp_path / "skew.json"
    p.write_text(json.dumps({"interval": [-1, 3]}))
    code, out, _ = invoke(["soliton", "--family", "mabuchi", "--in", str(p)], capsys)
    assert code == 2
    assert json.loads(out)["status"] == "Infeasible"


def test_out_csv_and_plot_files(tmp_path, capsys):
    out = tmp_path / "r.json"
    csv = tmp_path / "d.csv"
    plot = tmp_path / "d.dat"
    code, stdout, _ = invoke(
        ["na", "--in", "inputs/blp2_filtration.json", "--out", str(out), "--csv", str(csv), "--plot", str(plot)], capsys
    )
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["result"]["J_NA"] == pytest.approx(1 / 3)
    rows = csv.read_text().splitlines()
    assert len(rows) > 10 and "," in rows[1]
    assert plot.read_text().strip()


def test_ode_csv(tmp_path, capsys):
    csv = tmp_path / "u.csv"
    code, _, _ = invoke(["ode1d", "--in", "inputs/p1.json", "--csv", str(csv), "--grid", "1025"], capsys)
    assert code == 0
    first = csv.read_text().splitlines()[1].split(",")
    x, u = float(first[0]), float(first[1])
    assert u == pytest.approx(2 * math.log(math.cosh(x / 2)) + math.log(2), abs=1e-5)


def test_futaki_needs_vector(capsys):
    code, out, _ = invoke(["futaki", "--in", "inputs/blp2.json", "--xi", "1,2,3"], capsys)
    assert code == 1


def test_irregular_chi(capsys):
    code, out, _ = invoke(["quotient", "--in", "inputs/conifold.json", "--chi", "sqrt(2),1,1"], capsys)
    assert code == 1
    assert json.loads(out)["error"]["type"] == "IrregularQuotient"


def test_module_entry_point(repo_root):
    r = subprocess.run([sys.executable, "-m", "solitonlab", "--version"], capture_output=True, text=True, cwd=repo_root)
    assert r.returncode == 0
    assert __version__ in r.stdout
    r = subprocess.run(
        [sys.executable, "-m", "solitonlab", "ode1d", "--in", "inputs/teardrop.json"], capture_output=True, text=True, cwd=repo_root
    )
    assert r.returncode == 2
